//! Named example networks, checked in as JSON documents so tests and the CLI
//! refer to them stably.

use crate::error::{Error, Result};
use crate::network::MetricNetwork;

pub const FIXTURES: &[(&str, &str)] = &[
    ("circle", include_str!("../fixtures/circle.json")),
    ("line", include_str!("../fixtures/line.json")),
    ("k4", include_str!("../fixtures/k4.json")),
    ("three-arc", include_str!("../fixtures/three-arc.json")),
    ("q5", include_str!("../fixtures/q5.json")),
    ("dog-tree", include_str!("../fixtures/dog-tree.json")),
    ("star-2166", include_str!("../fixtures/star-2166.json")),
    ("star-611", include_str!("../fixtures/star-611.json")),
    ("fig8-tree", include_str!("../fixtures/fig8-tree.json")),
];

pub fn names() -> Vec<&'static str> {
    FIXTURES.iter().map(|&(n, _)| n).collect()
}

pub fn json(name: &str) -> Result<&'static str> {
    FIXTURES
        .iter()
        .find(|&&(n, _)| n == name)
        .map(|&(_, j)| j)
        .ok_or_else(|| Error::Parse(format!("unknown fixture {name:?}")))
}

pub fn network(name: &str) -> Result<MetricNetwork> {
    MetricNetwork::from_json(json(name)?)
}

/// Resolves `--net` arguments: a fixture name (optionally prefixed with
/// `fixtures/`) or a path to a JSON file.
pub fn resolve(spec: &str) -> Result<MetricNetwork> {
    let name = spec.strip_prefix("fixtures/").unwrap_or(spec);
    if let Ok(j) = json(name) {
        return MetricNetwork::from_json(j);
    }
    let text = std::fs::read_to_string(spec)?;
    MetricNetwork::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::rat;

    #[test]
    fn all_fixtures_load() {
        for &(name, _) in FIXTURES {
            let net = network(name).unwrap();
            assert!(net.total_length() > &rat(0), "{name}");
        }
    }

    #[test]
    fn fixture_shapes() {
        let circle = network("circle").unwrap();
        assert_eq!(*circle.total_length(), rat(1));
        assert!(circle.girth().is_some());

        let line = network("line").unwrap();
        assert_eq!(*line.total_length(), rat(1));
        assert_eq!(line.leaf_count(), 2);
        assert!(line.girth().is_none());

        let k4 = network("k4").unwrap();
        assert_eq!(*k4.total_length(), rat(6));
        assert_eq!(k4.girth(), Some(rat(3)));
        assert!(!k4.is_eulerian());

        let q5 = network("q5").unwrap();
        assert_eq!(*q5.total_length(), rat(15));
        assert_eq!(q5.girth(), Some(rat(3)));

        let dog = network("dog-tree").unwrap();
        assert_eq!(*dog.total_length(), rat(9));
        assert_eq!(dog.leaf_count(), 5);
        assert!(dog.is_tree());
        assert_eq!(dog.generalized_girth(), Some(rat(2)));

        let star = network("star-2166").unwrap();
        assert_eq!(*star.total_length(), rat(15));
        assert_eq!(star.leaf_count(), 4);

        let s611 = network("star-611").unwrap();
        assert_eq!(*s611.total_length(), rat(8));
        assert_eq!(s611.leaf_count(), 3);

        let fig8 = network("fig8-tree").unwrap();
        assert_eq!(*fig8.total_length(), rat(6));
        assert_eq!(fig8.leaf_count(), 5);
        assert!(fig8.is_tree());
    }

    #[test]
    fn resolve_accepts_prefix() {
        assert!(resolve("fixtures/dog-tree").is_ok());
        assert!(resolve("dog-tree").is_ok());
        assert!(resolve("no-such-thing").is_err());
    }
}
