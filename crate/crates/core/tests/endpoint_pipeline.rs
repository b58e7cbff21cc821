//! Frobenius data, launch and integration chained across the whole interval.

use spin32_core::ansatz::ModeLabel;
use spin32_core::profile::Endpoint;
use spin32_core::radial::{ConstraintForm, RadialSystem, REDUCED};
use spin32_core::solver::{endpoint_launch, frobenius, integrate, Tolerances, DEFAULT_OFFSET};
use spin32_core::{Complex64, Error, HalfInt, Parity};

fn system(j2: i32, parity: Parity) -> RadialSystem {
    RadialSystem::reduced(
        &ModeLabel::simple(HalfInt::from_twice(j2), 1.3, 0.7).unwrap(),
        parity,
    )
}

#[test]
fn regular_launch_integrates_to_the_horizon_region() {
    for j2 in [1, 3] {
        for parity in Parity::BOTH {
            let sys = system(j2, parity);
            let set = sys.constraints(ConstraintForm::Assembled).unwrap();
            let data = frobenius(&sys, Endpoint::Origin).unwrap();
            let top = data.exponents.len() - 1;
            let launch = endpoint_launch(&sys, &data, top, DEFAULT_OFFSET, false).unwrap();
            let y0: [Complex64; REDUCED] = std::array::from_fn(|k| launch.state[k]);
            let trace =
                integrate(&sys, &set, launch.omega, 1.5, &y0, &Tolerances::new(1e-10)).unwrap();
            assert!(trace
                .samples
                .iter()
                .all(|s| s.state.iter().all(|z| z.re.is_finite() && z.im.is_finite())));
            assert!(trace
                .samples
                .iter()
                .all(|s| s.residuals.iter().all(|&r| r >= 0.0)));
            assert!(trace.samples.windows(2).all(|w| w[1].omega > w[0].omega));
        }
    }
}

#[test]
fn horizon_side_launch_runs_inward() {
    let sys = system(3, Parity::Plus);
    let set = sys.constraints(ConstraintForm::Assembled).unwrap();
    let data = frobenius(&sys, Endpoint::Horizon).unwrap();
    let idx = data
        .exponents
        .iter()
        .position(|e| e.value.re >= 0.0)
        .unwrap();
    let launch = endpoint_launch(&sys, &data, idx, DEFAULT_OFFSET, false).unwrap();
    assert!(launch.omega < std::f64::consts::FRAC_PI_2);
    let y0: [Complex64; REDUCED] = std::array::from_fn(|k| launch.state[k]);
    let trace = integrate(&sys, &set, launch.omega, 0.3, &y0, &Tolerances::new(1e-9)).unwrap();
    assert!(trace.samples.windows(2).all(|w| w[1].omega < w[0].omega));
}

#[test]
fn singular_exponent_is_refused() {
    let sys = system(1, Parity::Plus);
    let data = frobenius(&sys, Endpoint::Origin).unwrap();
    assert!(matches!(
        endpoint_launch(&sys, &data, 0, DEFAULT_OFFSET, false),
        Err(Error::Domain(_))
    ));
}
