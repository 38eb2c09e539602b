//! Generate the four study topologies and print degree statistics.

use opinet::topology::parse_topology_spec;
use opinet::TopologySpec;

fn main() -> opinet::Result<()> {
    let specs = [
        TopologySpec::Empty { n: 100 },
        TopologySpec::Complete { n: 100 },
        TopologySpec::Star { n: 100 },
        parse_topology_spec("smallworld:100,k=1,p=0.2,seed=7")?,
    ];
    for spec in &specs {
        let g = spec.generate()?;
        let degrees: Vec<usize> = (0..g.node_count()).map(|r| g.degree(r)).collect();
        let max = degrees.iter().max().unwrap();
        let mean = degrees.iter().sum::<usize>() as f64 / degrees.len() as f64;
        println!(
            "{spec:?}: {} edges, mean degree {mean:.2}, max {max}, connected {}",
            g.edge_count(),
            g.is_connected()
        );
    }
    let ring = TopologySpec::SmallWorld { n: 8, k: 1, p: 0.3, seed: 1 }.generate()?;
    print!("{}", ring.to_edge_list());
    Ok(())
}
