use super::io::Incidence;
use super::network::WeightedNetwork;
use crate::error::{Error, Result};

/// Projects an entity-by-role incidence table onto the roles: the weight
/// between two roles is the number of entities linked to both.
pub fn project_bipartite(incidence: &Incidence) -> Result<WeightedNetwork> {
    let r = incidence.roles.len();
    if r < 2 {
        return Err(Error::DimensionMismatch(format!("need at least 2 roles, got {r}")));
    }
    if incidence.rows.is_empty() {
        return Err(Error::DimensionMismatch("incidence has no entity rows".into()));
    }
    let mut net = WeightedNetwork::empty(incidence.roles.clone())?;
    for (row_idx, row) in incidence.rows.iter().enumerate() {
        if row.len() != r {
            return Err(Error::DimensionMismatch(format!(
                "incidence row {row_idx} has {} entries, expected {r}",
                row.len()
            )));
        }
        for (col, &v) in row.iter().enumerate() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::NonBinary { row: row_idx, col, value: v });
            }
        }
        let members: Vec<usize> = (0..r).filter(|&c| row[c] == 1.0).collect();
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                let w = net.weight(i, j);
                net.set_weight(i, j, w + 1.0);
            }
        }
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roles(r: usize) -> Vec<String> {
        (1..=r).map(|i| format!("r{i}")).collect()
    }

    #[test]
    fn single_co_membership() {
        let inc = Incidence {
            roles: roles(3),
            rows: vec![vec![1.0, 1.0, 0.0]],
        };
        let net = project_bipartite(&inc).unwrap();
        assert_eq!(net.weight(0, 1), 1.0);
        assert_eq!(net.total_weight(), 1.0);
    }

    #[test]
    fn two_entities_sharing_three_roles() {
        let inc = Incidence {
            roles: roles(4),
            rows: vec![vec![1.0, 1.0, 1.0, 0.0], vec![1.0, 1.0, 1.0, 0.0]],
        };
        let net = project_bipartite(&inc).unwrap();
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            assert_eq!(net.weight(i, j), 2.0);
        }
        assert_eq!(net.weighted_degree(3).unwrap(), 0.0);
    }

    #[test]
    fn all_zero_and_non_binary() {
        let inc = Incidence {
            roles: roles(2),
            rows: vec![vec![0.0, 0.0]],
        };
        assert_eq!(project_bipartite(&inc).unwrap().total_weight(), 0.0);
        let inc = Incidence {
            roles: roles(2),
            rows: vec![vec![0.0, 2.0]],
        };
        assert!(matches!(project_bipartite(&inc), Err(Error::NonBinary { .. })));
    }
}
