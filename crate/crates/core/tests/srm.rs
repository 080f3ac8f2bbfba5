use nalgebra::DMatrix;
use noma_oqc::srm::{gram_matrix, qam_sum_rate, srm_probabilities, QamConstellation, QamGains, SrmMeasurement};
use num_complex::Complex64;

const FOCK_DIM: usize = 90;

fn fock_state(beta: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(FOCK_DIM);
    let mut c = Complex64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..FOCK_DIM {
        out.push(c);
        c = c * beta / ((n + 1) as f64).sqrt();
    }
    out
}

// measurement vectors U V* from the SVD of the state matrix
fn fock_srm_kernel(states: &[Complex64]) -> DMatrix<f64> {
    let m = states.len();
    let psi = DMatrix::from_fn(FOCK_DIM, m, |n, i| fock_state(states[i])[n]);
    let svd = psi.clone().svd(true, true);
    let mu = svd.u.unwrap() * svd.v_t.unwrap();
    let amps = mu.adjoint() * psi;
    DMatrix::from_fn(m, m, |i, y| amps[(y, i)].norm_sqr())
}

#[test]
fn kernel_matches_fock_space_construction() {
    let sets: Vec<Vec<Complex64>> = vec![
        QamConstellation::new(4, 0.6).unwrap().points().to_vec(),
        QamConstellation::new(4, 1.3).unwrap().points().to_vec(),
        vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(1.1, -0.4),
            Complex64::new(-0.3, 0.9),
        ],
    ];
    for states in sets {
        let ours = srm_probabilities(&SrmMeasurement::from_states(&states));
        let oracle = fock_srm_kernel(&states);
        assert!((&ours - &oracle).abs().max() < 1e-10, "{ours} vs {oracle}");
    }
}

#[test]
fn two_state_error_matches_closed_form() {
    for a in [0.2f64, 0.7, 1.5] {
        let states = [Complex64::new(0.0, 0.0), Complex64::new(a, 0.0)];
        let k = srm_probabilities(&SrmMeasurement::from_states(&states));
        let s = (-0.5 * a * a).exp();
        let want = 0.5 * (1.0 - (1.0 - s * s).sqrt());
        assert!((k[(0, 1)] - want).abs() < 1e-13 && (k[(1, 0)] - want).abs() < 1e-13);
    }
}

#[test]
fn gram_is_hermitian_with_unit_diagonal() {
    let c = QamConstellation::new(16, 0.45).unwrap();
    let meas = gram_matrix(&c);
    let g = meas.gram();
    assert!((g - g.adjoint()).iter().all(|z| z.norm() < 1e-15));
    assert!(g
        .diagonal()
        .iter()
        .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
    assert!(meas.min_eigenvalue() > -1e-12);
}

#[test]
fn kernels_are_row_stochastic() {
    for order in [4, 16, 64] {
        for alpha in [0.0, 0.05, 0.3, 1.0, 3.0] {
            let c = QamConstellation::new(order, alpha).unwrap();
            let k = srm_probabilities(&gram_matrix(&c));
            for row in k.row_iter() {
                let s: f64 = row.iter().sum();
                assert!((s - 1.0).abs() <= 1e-10, "m = {order}, α = {alpha}: row sum {s}");
                assert!(row.iter().all(|&p| p >= 0.0));
            }
        }
    }
}

#[test]
fn single_user_rate_saturates() {
    let c = QamConstellation::new(4, 5.0).unwrap();
    let r = qam_sum_rate(&c, 1, &QamGains::Uniform).unwrap();
    assert!((r.bits - 2.0).abs() < 1e-3, "{}", r.bits);
    let zero = QamConstellation::new(16, 0.0).unwrap();
    assert_eq!(qam_sum_rate(&zero, 1, &QamGains::Uniform).unwrap().bits, 0.0);
}

#[test]
fn nested_gains_reach_full_rate() {
    for order in [4usize, 16] {
        let c = QamConstellation::new(order, 4.0).unwrap();
        let r = qam_sum_rate(&c, 2, &QamGains::Nested).unwrap();
        assert_eq!(r.distinct_states, order * order);
        let want = 2.0 * (order as f64).log2();
        assert!((r.bits - want).abs() < 1e-2, "m = {order}: {}", r.bits);
    }
}

#[test]
fn uniform_gains_saturate_at_merged_lattice_entropy() {
    // two 4-QAM users: each quadrature sum takes -2, 0, 2 with weights 1/4, 1/2, 1/4
    let c = QamConstellation::new(4, 4.0).unwrap();
    let r = qam_sum_rate(&c, 2, &QamGains::Uniform).unwrap();
    assert_eq!(r.distinct_states, 9);
    assert!((r.bits - 3.0).abs() < 1e-2, "{}", r.bits);
}

#[test]
fn rate_grows_with_order() {
    let mut last = 0.0;
    for order in [4, 16, 64] {
        let c = QamConstellation::with_mean_photons(order, 50.0).unwrap();
        let r = qam_sum_rate(&c, 1, &QamGains::Uniform).unwrap().bits;
        assert!(r > last, "m = {order}: {r} after {last}");
        last = r;
    }
}
