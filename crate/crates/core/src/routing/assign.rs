//! Turbine-to-UAV assignment and wind-driven reassignment of turbines that
//! fall outside a UAV's effective flying range.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kinematics::{in_effective_range, UavSpec};
use crate::wind::{TurbineSpec, WindVector};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UavAssignment {
    pub uav: String,
    pub turbines: Vec<String>,
}

/// Turbine sets per UAV, in fleet order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Assignment {
    pub entries: Vec<UavAssignment>,
}

impl Assignment {
    pub fn turbines_of(&self, uav: &str) -> Option<&[String]> {
        self.entries.iter().find(|e| e.uav == uav).map(|e| e.turbines.as_slice())
    }

    pub fn owner_of(&self, turbine: &str) -> Option<&str> {
        self.entries.iter().find(|e| e.turbines.iter().any(|t| t == turbine)).map(|e| e.uav.as_str())
    }

    /// Checks that the sets are disjoint, name only known turbines, cover
    /// them all, and list UAVs in fleet order.
    pub fn validate(&self, uavs: &[UavSpec], turbines: &[TurbineSpec]) -> Result<()> {
        if self.entries.len() != uavs.len() || self.entries.iter().zip(uavs).any(|(e, u)| e.uav != u.id) {
            return Err(Error::InvalidInput("assignment must list every UAV once, in fleet order".into()));
        }
        let known: HashSet<&str> = turbines.iter().map(|t| t.id.as_str()).collect();
        let mut seen = HashSet::new();
        for id in self.entries.iter().flat_map(|e| &e.turbines) {
            if !known.contains(id.as_str()) {
                return Err(Error::InvalidInput(format!("unknown turbine {id} in assignment")));
            }
            if !seen.insert(id.as_str()) {
                return Err(Error::InvalidInput(format!("turbine {id} assigned twice")));
            }
        }
        if seen.len() != known.len() {
            let missing: Vec<&str> = turbines.iter().map(|t| t.id.as_str()).filter(|t| !seen.contains(t)).collect();
            return Err(Error::InvalidInput(format!("unassigned turbines: {}", missing.join(", "))));
        }
        Ok(())
    }
}

/// A turbine handed from one UAV to another.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub turbine: String,
    pub from: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reassignment {
    pub assignment: Assignment,
    pub moves: Vec<Move>,
}

/// Each turbine goes to the nearest UAV position; ties go to the lower
/// fleet index.
pub fn cluster_assign(uavs: &[UavSpec], turbines: &[TurbineSpec]) -> Result<Assignment> {
    if uavs.is_empty() {
        return Err(Error::InvalidInput("at least one UAV is required".into()));
    }
    let mut entries: Vec<UavAssignment> =
        uavs.iter().map(|u| UavAssignment { uav: u.id.clone(), turbines: Vec::new() }).collect();
    for t in turbines {
        let best = nearest(uavs.iter().enumerate(), t).expect("fleet is non-empty");
        entries[best].turbines.push(t.id.clone());
    }
    Ok(Assignment { entries })
}

fn nearest<'a>(candidates: impl Iterator<Item = (usize, &'a UavSpec)>, t: &TurbineSpec) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, u) in candidates {
        let d = u.pos.distance(t.pos);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best.map(|(i, _)| i)
}

/// Turbines of `assigned` outside the UAV's effective flying range.
pub fn out_of_range_set<'a>(uav: &UavSpec, assigned: &[&'a TurbineSpec], wind: &WindVector) -> Vec<&'a TurbineSpec> {
    assigned.iter().copied().filter(|t| !in_effective_range(t.pos, uav, wind)).collect()
}

/// Moves every stranded turbine to the nearest UAV whose effective range
/// still contains it. UAVs with more stranded turbines are handled first.
pub fn reassign(
    assignment: &Assignment,
    uavs: &[UavSpec],
    turbines: &[TurbineSpec],
    wind: &WindVector,
) -> Result<Reassignment> {
    assignment.validate(uavs, turbines)?;
    let lookup = |id: &str| turbines.iter().find(|t| t.id == id).expect("validated");

    let stranded: Vec<Vec<&TurbineSpec>> = assignment
        .entries
        .iter()
        .zip(uavs)
        .map(|(e, u)| {
            let assigned: Vec<&TurbineSpec> = e.turbines.iter().map(|id| lookup(id)).collect();
            out_of_range_set(u, &assigned, wind)
        })
        .collect();

    let mut order: Vec<usize> = (0..uavs.len()).collect();
    order.sort_by(|&a, &b| stranded[b].len().cmp(&stranded[a].len()).then(a.cmp(&b)));

    let mut result = assignment.clone();
    let mut moves = Vec::new();
    let mut unreachable = Vec::new();
    for i in order {
        for t in &stranded[i] {
            let target = nearest(uavs.iter().enumerate().filter(|(_, u)| in_effective_range(t.pos, u, wind)), t);
            match target {
                Some(j) => {
                    result.entries[i].turbines.retain(|id| *id != t.id);
                    result.entries[j].turbines.push(t.id.clone());
                    moves.push(Move { turbine: t.id.clone(), from: uavs[i].id.clone(), to: uavs[j].id.clone() });
                }
                None => unreachable.push(t.id.clone()),
            }
        }
    }
    if !unreachable.is_empty() {
        return Err(Error::UnreachableTurbines(unreachable));
    }
    Ok(Reassignment { assignment: result, moves })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec2;

    fn t(id: &str, x: f64, y: f64) -> TurbineSpec {
        TurbineSpec::sg_8_0_167(id, Vec2::new(x, y))
    }

    fn uav(id: &str, x: f64, y: f64, rho: f64) -> UavSpec {
        UavSpec::falcon_8(id, Vec2::new(x, y)).with_flying_distance(rho)
    }

    #[test]
    fn single_uav_takes_everything() {
        let ts = vec![t("a", 1.0, 2.0), t("b", -5.0, 3.0)];
        let a = cluster_assign(&[uav("U1", 0.0, 0.0, 1e4)], &ts).unwrap();
        assert_eq!(a.entries[0].turbines, vec!["a", "b"]);
        assert!(cluster_assign(&[], &ts).is_err());
    }

    #[test]
    fn separated_clusters_split_cleanly() {
        let uavs = [uav("U1", 0.0, 0.0, 1e4), uav("U2", 10_000.0, 0.0, 1e4)];
        let ts = vec![t("a", 100.0, 50.0), t("b", 9_900.0, 0.0), t("c", -300.0, 0.0), t("d", 10_400.0, 20.0)];
        let a = cluster_assign(&uavs, &ts).unwrap();
        assert_eq!(a.turbines_of("U1").unwrap(), ["a", "c"]);
        assert_eq!(a.turbines_of("U2").unwrap(), ["b", "d"]);
        a.validate(&uavs, &ts).unwrap();
    }

    #[test]
    fn equidistant_turbine_goes_to_lower_index() {
        let uavs = [uav("U1", -100.0, 0.0, 1e4), uav("U2", 100.0, 0.0, 1e4)];
        let a = cluster_assign(&uavs, &[t("mid", 0.0, 7.0)]).unwrap();
        assert_eq!(a.owner_of("mid"), Some("U1"));
    }

    #[test]
    fn calm_air_leaves_assignment_untouched() {
        let uavs = [uav("U1", 0.0, 0.0, 5000.0), uav("U2", 4000.0, 0.0, 5000.0)];
        let ts = vec![t("a", 1000.0, 0.0), t("b", 3000.0, 0.0)];
        let a = cluster_assign(&uavs, &ts).unwrap();
        let r = reassign(&a, &uavs, &ts, &WindVector::CALM).unwrap();
        assert_eq!(r.assignment, a);
        assert!(r.moves.is_empty());
        let refs: Vec<&TurbineSpec> = ts.iter().collect();
        assert!(out_of_range_set(&uavs[0], &refs[..1], &WindVector::CALM).is_empty());
    }

    #[test]
    fn stranded_turbine_moves_to_nearest_covering_uav_with_ties_to_lower_index() {
        // Wind from the east drifts ranges west; "e" lies east of U1 and
        // sits exactly between U2 and U3.
        let wind = WindVector::new(-2.0, 0.0);
        let uavs = [uav("U1", 0.0, 0.0, 2500.0), uav("U2", 3000.0, 1000.0, 2500.0), uav("U3", 3000.0, -1000.0, 2500.0)];
        let ts = vec![t("e", 2000.0, 0.0), t("w", -500.0, 0.0)];
        let a = Assignment {
            entries: vec![
                UavAssignment { uav: "U1".into(), turbines: vec!["e".into(), "w".into()] },
                UavAssignment { uav: "U2".into(), turbines: vec![] },
                UavAssignment { uav: "U3".into(), turbines: vec![] },
            ],
        };
        assert!(!in_effective_range(ts[0].pos, &uavs[0], &wind));
        let r = reassign(&a, &uavs, &ts, &wind).unwrap();
        assert_eq!(r.moves, vec![Move { turbine: "e".into(), from: "U1".into(), to: "U2".into() }]);
        assert_eq!(r.assignment.owner_of("e"), Some("U2"));
        r.assignment.validate(&uavs, &ts).unwrap();
    }

    #[test]
    fn turbine_in_no_range_is_reported() {
        let wind = WindVector::new(-2.0, 0.0);
        let uavs = [uav("U1", 0.0, 0.0, 1500.0)];
        let ts = vec![t("far", 1400.0, 0.0)];
        let a = cluster_assign(&uavs, &ts).unwrap();
        match reassign(&a, &uavs, &ts, &wind) {
            Err(Error::UnreachableTurbines(ids)) => assert_eq!(ids, vec!["far"]),
            other => panic!("expected unreachable error, got {other:?}"),
        }
    }

    #[test]
    fn validate_catches_duplicates_and_gaps() {
        let uavs = [uav("U1", 0.0, 0.0, 1e4)];
        let ts = vec![t("a", 0.0, 1.0), t("b", 0.0, 2.0)];
        let dup =
            Assignment { entries: vec![UavAssignment { uav: "U1".into(), turbines: vec!["a".into(), "a".into()] }] };
        assert!(dup.validate(&uavs, &ts).is_err());
        let gap = Assignment { entries: vec![UavAssignment { uav: "U1".into(), turbines: vec!["a".into()] }] };
        assert!(gap.validate(&uavs, &ts).is_err());
    }
}
