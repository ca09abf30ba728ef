use std::collections::HashMap;

use windfarm_core::kinematics::in_effective_range;
use windfarm_core::routing::fixture::reference_scenario;
use windfarm_core::routing::{cluster_assign, plan_inspection, PlannerConfig, RoutePlan};
use windfarm_core::WindVector;

fn plans(wind: &WindVector) -> (RoutePlan, RoutePlan) {
    let s = reference_scenario();
    let alg = plan_inspection(&s.uavs, &s.turbines, &s.assignment, wind, &PlannerConfig::default()).unwrap();
    let base = plan_inspection(&s.uavs, &s.turbines, &s.assignment, wind, &PlannerConfig::baseline()).unwrap();
    (alg, base)
}

#[test]
fn east_wind_reproduces_reassignment_and_single_loops() {
    let s = reference_scenario();
    let (alg, base) = plans(&s.wind().unwrap());

    assert_eq!(alg.moves.len(), 1);
    assert_eq!(alg.moves[0].turbine, "E105");
    assert_eq!((alg.moves[0].from.as_str(), alg.moves[0].to.as_str()), ("UAV1", "UAV2"));

    assert_eq!(alg.uav("UAV1").unwrap().paths(), vec!["B110>C214>A106>A411>B110"]);
    assert_eq!(alg.uav("UAV2").unwrap().paths(), vec!["A213>D101>E105>A213"]);
    assert_eq!(base.uav("UAV1").unwrap().route_count(), 2);
    assert_eq!(base.uav("UAV2").unwrap().paths(), vec!["A213>D101>A213"]);

    let reduction = (base.total_time - alg.total_time) / base.total_time;
    assert!(reduction >= 0.15, "reduction {reduction}");
    println!(
        "baseline {:.4} min, reassigned {:.4} min, reduction {:.1}%",
        base.total_time / 60.0,
        alg.total_time / 60.0,
        100.0 * reduction
    );
}

#[test]
fn plan_invariants_hold_for_assorted_winds() {
    let s = reference_scenario();
    for (speed, deg) in [(0.0, 0.0), (5.0, 30.0), (10.0, 90.0), (12.0, 200.0), (8.0, 315.0)] {
        let wind = windfarm_core::wind::wind_vector(speed, f64::to_radians(deg)).unwrap();
        let plan = match plan_inspection(&s.uavs, &s.turbines, &s.assignment, &wind, &PlannerConfig::default()) {
            Ok(p) => p,
            Err(windfarm_core::Error::UnreachableTurbines(_)) => continue,
            Err(e) => panic!("{e}"),
        };
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for u in &plan.uavs {
            let spec = s.uavs.iter().find(|x| x.id == u.uav).unwrap();
            for r in &u.routes {
                assert!(r.time <= spec.t_max + 1e-9);
                let legs: f64 = r.legs.iter().map(|l| l.time).sum();
                assert!((legs - r.time).abs() < 1e-9);
            }
            for t in u.visited() {
                *seen.entry(t).or_default() += 1;
                let pos = s.turbines.iter().find(|x| &x.id == t).unwrap().pos;
                assert!(in_effective_range(pos, spec, &wind), "{t} outside range of {}", u.uav);
            }
        }
        assert_eq!(seen.len(), s.turbines.len());
        assert!(seen.values().all(|&c| c == 1));
        let total: f64 = plan.uavs.iter().flat_map(|u| &u.routes).flat_map(|r| &r.legs).map(|l| l.time).sum();
        assert!((total - plan.total_time).abs() < 1e-6);
    }
}

#[test]
fn calm_air_makes_both_plans_identical() {
    let (alg, base) = plans(&WindVector::CALM);
    assert!(alg.moves.is_empty());
    assert_eq!(alg.uavs, base.uavs);
    assert_eq!(alg.total_time, base.total_time);
}

#[test]
fn shipped_fixture_matches_builtin() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/reference_scenario.json");
    let loaded = windfarm_core::routing::fixture::Scenario::load(path).unwrap();
    assert_eq!(loaded, reference_scenario());
}

#[test]
fn clustered_assignment_is_plannable() {
    let s = reference_scenario();
    let a = cluster_assign(&s.uavs, &s.turbines).unwrap();
    let plan = plan_inspection(&s.uavs, &s.turbines, &a, &WindVector::CALM, &PlannerConfig::default()).unwrap();
    assert!(plan.total_time > 0.0);
}
