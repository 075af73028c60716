//! Full-run behavior: determinism, blow-up flagging, threshold bisection
//! directions, convergence-study mechanics and uniform-bound tracking.

use chsplit_core::energy::TauStarEstimate;
use chsplit_core::error::Error;
use chsplit_core::harness::{
    InitialDataSpec, ModeSpec, convergence_study, run, tau_star_bisection,
};
use chsplit_core::propagators::{Dealias, SolverParams, SplitOrder};
use chsplit_core::transform::Workspace;

fn params(nu: f64, tau: f64, n: usize, order: SplitOrder) -> SolverParams {
    SolverParams {
        nu,
        tau,
        n,
        dealias: Dealias::TwoThirds,
        order,
    }
}

fn seeded(seed: u64, h1: f64) -> InitialDataSpec {
    InitialDataSpec::RandomBandLimited {
        seed,
        band: 4,
        h1_norm: h1,
    }
}

#[test]
fn identical_inputs_give_bit_identical_diagnostics() {
    for order in [SplitOrder::Ln, SplitOrder::Nl] {
        let p = params(1.0, 1e-3, 32, order);
        let mut ws = Workspace::new(p.grid());
        let a = run(&seeded(11, 1.0), &p, 50, 2, &mut ws).unwrap();
        let b = run(&seeded(11, 1.0), &p, 50, 2, &mut ws).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.time.to_bits(), y.time.to_bits());
            assert_eq!(x.mass.to_bits(), y.mass.to_bits());
            assert_eq!(x.e1_total.to_bits(), y.e1_total.to_bits());
            assert_eq!(x.linf.to_bits(), y.linf.to_bits());
            assert_eq!(x.inc_l2.to_bits(), y.inc_l2.to_bits());
            let (cx, cy) = (x.cert.unwrap(), y.cert.unwrap());
            assert_eq!(cx.lhs.to_bits(), cy.lhs.to_bits());
            assert_eq!(cx.rhs.to_bits(), cy.rhs.to_bits());
        }
    }
}

#[test]
fn mass_is_pinned_across_a_run() {
    let p = params(1.0, 1e-3, 32, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let d = run(&seeded(3, 1.5), &p, 500, 2, &mut ws).unwrap();
    for r in &d.records {
        assert!(r.mass.abs() <= 1e-12);
    }
}

#[test]
fn blow_up_guard_flags_unstable_runs() {
    // weak mobility with a large step: the cubic amplification wins
    let p = params(0.01, 1.0, 64, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let d = run(&seeded(42, 2.0), &p, 200, 2, &mut ws).unwrap();
    assert!(d.is_unstable());
    let stop = d.unstable_at.unwrap();
    assert!(stop < 200);
    assert_eq!(d.records.len() as u64, stop);
    assert!(d.records.last().unwrap().linf > 1e6);
}

#[test]
fn huge_step_at_unit_mobility_reports_indeterminate_or_violated_certificates() {
    // the modified energy of band-limited data overflows at tau = 10, so
    // the first pair is indeterminate; the run itself does not blow up
    let p = params(1.0, 10.0, 64, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let d = run(&seeded(42, 1.5), &p, 50, 2, &mut ws).unwrap();
    assert!(!d.is_unstable());
    let bad = d
        .records
        .iter()
        .filter(|r| !r.cert.map(|c| c.satisfied).unwrap_or(false))
        .count();
    assert!(bad >= 1, "expected at least one non-passing certificate");
}

#[test]
fn tau_star_reports_lower_bound_on_tame_data() {
    let p = params(1.0, 1e-3, 32, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let tiny = InitialDataSpec::Modes(vec![ModeSpec {
        k: (1, 0),
        amplitude: 1e-3,
        phase: 0.0,
    }]);
    let est = tau_star_bisection(&tiny, &p, 50, (1e-3, 2.0), &mut ws).unwrap();
    assert_eq!(est, TauStarEstimate::AtLeast(2.0));
}

#[test]
fn tau_star_rejects_a_bad_bracket_bottom() {
    let p = params(0.01, 1e-3, 64, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let err = tau_star_bisection(&seeded(42, 2.0), &p, 100, (1.0, 10.0), &mut ws);
    assert!(matches!(err, Err(Error::BracketRejected { .. })));
}

#[test]
fn tau_star_shrinks_with_mobility_and_data_size() {
    let mut ws = Workspace::new(SolverParams::new(1.0, 1e-3, 64).unwrap().grid());
    let bisect = |nu: f64, h1: f64, ws: &mut Workspace| {
        let p = params(nu, 1e-3, 64, SplitOrder::Ln);
        tau_star_bisection(&seeded(7, h1), &p, 150, (1e-4, 50.0), ws).unwrap()
    };
    // direction in nu: the threshold at nu = 0.05 sits far below the
    // stability seen at nu = 0.25
    let small_nu = bisect(0.05, 2.0, &mut ws);
    let large_nu = bisect(0.25, 2.0, &mut ws);
    assert!(matches!(small_nu, TauStarEstimate::Bracketed(_)));
    assert!(small_nu.value() < large_nu.value());
    assert!(large_nu.is_lower_bound());
    // direction in the initial norm at fixed nu: nonincreasing
    let small_data = bisect(0.05, 1.0, &mut ws);
    let large_data = bisect(0.05, 3.0, &mut ws);
    assert!(large_data.value() <= small_data.value() * (1.0 + 1e-12));
}

#[test]
fn convergence_error_grows_with_the_horizon() {
    // sup over a longer window dominates the shorter one by definition
    let p = params(1.0, 1e-3, 32, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let u0 = InitialDataSpec::Modes(vec![
        ModeSpec {
            k: (1, 0),
            amplitude: 0.5,
            phase: 0.0,
        },
        ModeSpec {
            k: (0, 2),
            amplitude: 0.25,
            phase: 0.0,
        },
    ]);
    let taus: Vec<f64> = (4..=7).map(|j| 0.25 * 2.0_f64.powi(-j)).collect();
    let short = convergence_study(&u0, &p, 0.25, &taus, None, &mut ws).unwrap();
    let long = convergence_study(&u0, &p, 0.5, &taus, None, &mut ws).unwrap();
    for (a, b) in long.errors.iter().zip(&short.errors) {
        assert!(a >= b, "horizon doubling shrank the error: {a} < {b}");
    }
    // and the short-horizon study already shows first-order behavior
    assert!(
        (0.8..=1.25).contains(&short.fitted_order),
        "order {}",
        short.fitted_order
    );
    for w in short.errors.windows(2) {
        assert!(w[0] > w[1], "errors not decreasing in tau");
    }
}

#[test]
fn reference_step_must_subdivide_every_tau() {
    let p = params(1.0, 1e-3, 32, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let u0 = seeded(1, 1.0);
    // tau_ref bigger than min(taus)/32 is rejected
    let taus = [0.25 / 16.0, 0.25 / 32.0];
    let r = convergence_study(&u0, &p, 0.25, &taus, Some(0.25 / 64.0), &mut ws);
    assert!(r.is_err());
}

#[test]
fn uniform_bounds_stabilize_over_long_runs() {
    // running maxima of H^{k0} and H^1 over the second half of a long run
    // must not exceed the first half
    for k0 in [2u32, 4] {
        let p = params(1.0, 1e-3, 64, SplitOrder::Ln);
        let mut ws = Workspace::new(p.grid());
        let d = run(&seeded(5, 1.5), &p, 10_000, k0, &mut ws).unwrap();
        assert!(!d.is_unstable());
        let half = d.records.len() / 2;
        let running_max = |rs: &[chsplit_core::StepRecord], f: fn(&chsplit_core::StepRecord) -> f64| {
            rs.iter().map(f).fold(0.0_f64, f64::max)
        };
        let hk0_first = running_max(&d.records[..half], |r| r.hk0);
        let hk0_second = running_max(&d.records[half..], |r| r.hk0);
        assert!(
            hk0_second <= hk0_first * (1.0 + 1e-10),
            "k0 = {k0}: running max grew: {hk0_second} vs {hk0_first}"
        );
        let h1_first = running_max(&d.records[..half], |r| r.h1);
        let h1_second = running_max(&d.records[half..], |r| r.h1);
        assert!(h1_second <= h1_first * (1.0 + 1e-10));
        for r in &d.records {
            assert!(r.h1.is_finite() && r.hk0.is_finite());
        }
    }
}

#[test]
fn gradient_norm_descends_from_the_first_certified_energy() {
    // the quadratic weight dominates nu |k|^2 / 2, so monotone E1 pins
    // || grad u^n ||_2^2 <= 2 E1(u^1) / nu from the first iterate on
    use chsplit_core::energy::modified_energy_parts;
    use chsplit_core::norms::homogeneous_norm;
    use chsplit_core::propagators::Stepper;

    let p = params(1.0, 1e-3, 32, SplitOrder::Ln);
    let mut ws = Workspace::new(p.grid());
    let stepper = Stepper::new(&p).unwrap();
    let mut state = seeded(9, 1.5).realize(p.grid(), &mut ws).unwrap();
    let mut bound = f64::NAN;
    for n in 1..=500 {
        state = stepper.composed(&state, &mut ws);
        let nodes = ws.inverse(&state).unwrap();
        if n == 1 {
            let e1 = modified_energy_parts(&state, &nodes, &p).unwrap().e1_total;
            bound = (2.0 * e1 / p.nu).sqrt();
        }
        let hdot1 = homogeneous_norm(&state, 1.0).unwrap();
        assert!(
            hdot1 <= bound * (1.0 + 1e-6),
            "step {n}: {hdot1} vs {bound}"
        );
    }
}
