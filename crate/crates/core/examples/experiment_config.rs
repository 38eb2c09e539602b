//! Drive the experiment runner from an inline TOML config and list the
//! files it writes.

use opinet::experiment::{run_to_dir, ExperimentConfig};

const CONFIG: &str = r#"
[model]
opinions = 2
rates = [[0.0, 1.0], [1.0, 0.0]]

[influence]
lambda = [10.0, 10.0]

[graph]
kind = "smallworld"
n = 100
k = 1
p = 0.2

[run]
solver = "ssa"
t_end = 200.0
replications = 4
seed = 5
events = false
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(CONFIG)?;
    let resolved = cfg.resolve()?;
    println!("{} agents, {} edges", resolved.network.agent_count(), resolved.network.graph().edge_count());
    let dir = std::env::temp_dir().join("opinet-example");
    for f in run_to_dir(&cfg, &dir)? {
        println!("wrote {}", f.display());
    }
    print!("{}", std::fs::read_to_string(dir.join("moments.csv"))?);
    Ok(())
}
