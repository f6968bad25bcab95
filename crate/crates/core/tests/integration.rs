use std::f64::consts::FRAC_PI_2;

use opcalc_core::calculus::DEFAULT_PHI;
use opcalc_core::matfun::C64;
use opcalc_core::solver::RobinProblem;
use opcalc_core::verify::compare::{robin_oracle_difference, robin_refinement};
use opcalc_core::verify::report::Verdict;
use opcalc_core::verify::*;

fn family_template(fam: ExampleFamily, n: usize) -> ProblemTemplate {
    let (a, h) = fam.operators(n).unwrap();
    let mut t = ProblemTemplate::new(a, h);
    t.mask = fam.mask();
    t.seed = 5;
    t
}

#[test]
fn solver_matches_oracle_at_region_points() {
    let n = 64;
    let lambdas = [C64::new(16.0, 0.0), C64::from_polar(60.0, 1.0), C64::new(0.0, 150.0)];
    let mut checked = 0;
    for fam in ExampleFamily::ALL {
        let t = family_template(fam, n);
        let data = t.data(n);
        for &lambda in &lambdas {
            let problem = RobinProblem {
                a: t.a.clone(),
                h: t.h.clone(),
                point: fam.point(lambda),
                f_samples: data.f.clone(),
                d0: data.d0.clone(),
                u1: data.u1.clone(),
                p: 2.0,
                nx: n,
                norm_weight: t.norm_weight,
            };
            let (_, cmp) = robin_oracle_difference(&problem).unwrap();
            assert!(
                cmp.relative_difference <= 5e-3,
                "{fam:?} at λ = {lambda}: {:.3e}",
                cmp.relative_difference
            );
            checked += 1;
        }
    }
    assert!(checked >= 12);
}

#[test]
fn interior_residual_is_second_order() {
    // the asymptotic regime needs h·√‖A‖ well below 1; for the fourth-order
    // family at n = 8 that is nx ≈ 1000
    for fam in ExampleFamily::ALL {
        let t = family_template(fam, 8);
        let study = robin_refinement(&t, fam.point(C64::new(25.0, 0.0)), 1025).unwrap();
        assert!(
            (1.8..=2.2).contains(&study.residual_order),
            "{fam:?}: residual order {:.3}",
            study.residual_order
        );
    }
}

#[test]
fn boundary_trace_flat_in_mu() {
    let (a, h) = ExampleFamily::Wentzell.operators(16).unwrap();
    let t = ProblemTemplate::new(a, h);
    let grid = RegionGrid {
        lambda_moduli: log_space(4.0, 400.0, 3),
        lambda_args: vec![0.0, FRAC_PI_2],
        mu_moduli: log_space(1.0, 1e4, 9),
        mu_args: vec![0.0],
        mu_scale: MuScale::Edge,
        filter: RegionFilter::Omega { r: 4.0 },
        phi0: DEFAULT_PHI,
        phi1: DEFAULT_PHI,
    };
    let r = check_boundary_trace(&grid, &t).unwrap();
    assert!(r.failures.is_empty());
    assert!(
        r.loglog_slopes.mu_decades >= 2.0 - report::DECADE_SLACK,
        "{:?}",
        r.loglog_slopes
    );
    assert!(
        matches!(r.loglog_slopes.mu, Some(s) if s <= FLAT_SLOPE),
        "{:?}",
        r.loglog_slopes
    );
}

#[test]
fn second_case_region_reports_are_flat() {
    let (a, h) = ExampleFamily::Volterra.operators(16).unwrap();
    let mut tpl = RegionTemplate::new(log_space(1.0, 1e6, 13), vec![0.0, 1e-3, 1e-2, 0.1, 1.0]);
    tpl.epsilon = 0.5;
    tpl.mu_scale = MuScale::Edge;
    let r = check_lambda_regions(RegionCase::Second, &tpl, &a, &h).unwrap();
    assert!(r.contraction_max <= 0.5);
    let stab = r.stab_op.as_ref().expect("second case carries the Stab-Op report");
    for rep in [&r.lambda_inverse, &r.q_lambda_inverse, stab] {
        assert_eq!(rep.verdict, Verdict::Flat, "{}: {:?}", rep.label, rep.loglog_slopes);
    }
}

#[test]
fn first_case_lambda_inverse_is_flat() {
    let (a, h) = ExampleFamily::Wentzell.operators(16).unwrap();
    let mut tpl = RegionTemplate::new(log_space(1.0, 1e6, 13), log_space(1.0, 1e3, 7));
    tpl.mu_scale = MuScale::Edge;
    let r = check_lambda_regions(RegionCase::First, &tpl, &a, &h).unwrap();
    assert!(r.contraction_max <= 0.5);
    assert_eq!(
        r.lambda_inverse.verdict,
        Verdict::Flat,
        "{:?}",
        r.lambda_inverse.loglog_slopes
    );
}

#[test]
fn reports_serialize_round_trip() {
    let (a, h) = ExampleFamily::Volterra.operators(8).unwrap();
    let t = ProblemTemplate::new(a, h);
    let grid = RegionGrid {
        lambda_moduli: log_space(8.0, 800.0, 3),
        lambda_args: vec![0.0],
        mu_moduli: vec![0.0, 0.5],
        mu_args: vec![0.0],
        mu_scale: MuScale::Edge,
        filter: RegionFilter::Pi { rho: 8.0, epsilon: 0.5 },
        phi0: DEFAULT_PHI,
        phi1: DEFAULT_PHI,
    };
    let r = check_sharp_estimate(EstimateCase::Second, &grid, &t).unwrap();
    let back: EstimateReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    let g: RegionGrid = serde_json::from_str(&serde_json::to_string(&grid).unwrap()).unwrap();
    assert_eq!(g.points().len(), grid.points().len());
}
