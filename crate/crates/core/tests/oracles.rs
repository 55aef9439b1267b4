//! Closed forms against sampled spectra and other independent oracles.

use mimo_scaling::infotheory::{
    decompose, multiplexing_rate_finite, mutual_info_finite, waterfilling_capacity, ChannelMatrix,
    MutualInformation,
};
use mimo_scaling::montecarlo::{
    apply_projector, empirical_spectrum, ergodic_loss, ergodic_map, ergodic_mutual_info, sample_matrix,
    trial_seed, EnsembleKind, EnsembleSpec, ErgodicEstimate, ProjectorSpec,
};
use mimo_scaling::spectra::{EmpiricalSpectrum, SpectralFamily, SpectralMeasure};
use nalgebra::{Complex, DMatrix};

fn mp() -> SpectralFamily {
    SpectralFamily::square_iid_gram(1.0).unwrap()
}

fn sampled_mp(n: usize, seed: u64) -> EmpiricalSpectrum {
    empirical_spectrum(&EnsembleSpec::iid_complex(n, n).unwrap(), seed).unwrap()
}

#[test]
fn psi_eta_and_log_mean_against_sampled_1024() {
    let s = sampled_mp(1024, 11);
    let psi_mc = s.average(|x| -x / (1.0 + x));
    assert!((mp().psi(-1.0).unwrap() - psi_mc).abs() < 0.01);
    let eta_mc = s.average(|x| 1.0 / (1.0 + 10.0 * x));
    assert!((mp().eta(10.0).unwrap() - eta_mc).abs() < 0.01);
    let log_mc = s.average(f64::log2);
    assert!((mp().log_mean().unwrap() + std::f64::consts::LOG2_E).abs() < 1e-8);
    assert!((log_mc + std::f64::consts::LOG2_E).abs() < 0.02, "{log_mc}");
    assert!((s.max() - 4.0).abs() < 0.3, "edge {}", s.max());
    // S of the sampled spectrum against 1/(1+z)
    for z in [-0.1, -0.25, -0.5] {
        assert!((s.s_transform(z).unwrap() - 1.0 / (1.0 + z)).abs() < 0.05);
    }
}

#[test]
fn rank_of_a_fat_draw() {
    let s = empirical_spectrum(&EnsembleSpec::iid_complex(256, 512).unwrap(), 2).unwrap();
    assert_eq!(s.total_dim(), 512);
    assert_eq!(s.rank_measure(), 0.5);
}

#[test]
fn trace_normalization() {
    for spec in [
        EnsembleSpec::iid_complex(512, 512).unwrap(),
        EnsembleSpec::iid_real(256, 128).unwrap(),
        EnsembleSpec::product(2, 256).unwrap(),
    ] {
        let s = empirical_spectrum(&spec, 5).unwrap();
        assert!((s.mean() - 1.0).abs() < 0.1, "{spec:?}: {}", s.mean());
    }
}

#[test]
fn haar_draws() {
    let h = sample_matrix(&EnsembleSpec::haar(64).unwrap(), 9).unwrap().to_complex();
    let g = h.adjoint() * &h;
    let err = (g - DMatrix::<Complex<f64>>::identity(64, 64))
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    assert!(err <= 1e-12, "{err}");
    let s = empirical_spectrum(&EnsembleSpec::haar(32).unwrap(), 1).unwrap();
    assert!(s.eigenvalues().iter().all(|x| (x - 1.0).abs() < 1e-10));
}

#[test]
fn projected_iid_keeps_entry_variance() {
    // second moment of the kept block per entry, over 10^3 draws
    let spec = EnsembleSpec::iid_complex(8, 4).unwrap();
    let proj = ProjectorSpec::receive(0.5).unwrap();
    let e = ergodic_map(&spec, 1000, 3, |h| {
        let p = apply_projector(h, &proj)?;
        let power: f64 = p.to_complex().iter().map(|c| c.norm_sqr()).sum();
        Ok(power / (p.rows() * p.cols()) as f64)
    })
    .unwrap();
    assert!((e.mean - 1.0 / 8.0).abs() < 3.0 * e.stderr + 1e-3, "{e:?}");
}

#[test]
fn unitary_invariance_of_mutual_info() {
    let h = sample_matrix(&EnsembleSpec::iid_complex(6, 4).unwrap(), 1).unwrap();
    let u = sample_matrix(&EnsembleSpec::haar(6).unwrap(), 2).unwrap();
    let v = sample_matrix(&EnsembleSpec::haar(4).unwrap(), 3).unwrap();
    let rotated = u.mul(&h).unwrap().mul(&v).unwrap();
    for g in [0.1, 10.0, 1e5] {
        let a = mutual_info_finite(&h, g).unwrap();
        let b = mutual_info_finite(&rotated, g).unwrap();
        assert!((a - b).abs() < 1e-10);
        let a = multiplexing_rate_finite(&h, g).unwrap();
        let b = multiplexing_rate_finite(&rotated, g).unwrap();
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn finite_routes_agree() {
    let h = sample_matrix(&EnsembleSpec::iid_real(5, 7).unwrap(), 4).unwrap();
    let s = h.gram_spectrum().unwrap();
    for g in [0.5, 30.0] {
        let d = decompose(&s, g).unwrap();
        assert!((mutual_info_finite(&h, g).unwrap() - d.mutual_info).abs() < 1e-10);
        assert!((multiplexing_rate_finite(&h, g).unwrap() - d.multiplexing_rate).abs() < 1e-10);
    }
    // rank 5 of 7 columns
    assert_eq!(s.nonzero().len(), 5);
}

#[test]
fn mutual_info_derivative() {
    let sampled = sampled_mp(64, 8);
    for g in [0.3, 3.0, 300.0] {
        let h = 1e-3 * g;
        let fd = |m: &dyn Fn(f64) -> f64| (m(g - 2.0 * h) - 8.0 * m(g - h) + 8.0 * m(g + h) - m(g + 2.0 * h)) / (12.0 * h);
        let d_s = fd(&|x| sampled.mutual_info(x).unwrap());
        let exact_s = (1.0 - sampled.eta(g).unwrap()) / (g * std::f64::consts::LN_2);
        assert!(((d_s - exact_s) / exact_s).abs() < 1e-6);
        let d_f = fd(&|x| mp().mutual_info(x).unwrap());
        let exact_f = (1.0 - mp().eta(g).unwrap()) / (g * std::f64::consts::LN_2);
        assert!(((d_f - exact_f) / exact_f).abs() < 1e-5);
    }
}

#[test]
fn family_mutual_info_against_large_draw() {
    let s = sampled_mp(512, 21);
    for g in [1.0, 100.0] {
        let a = mp().mutual_info(g).unwrap();
        let b = s.mutual_info(g).unwrap();
        assert!((a - b).abs() < 0.02, "gamma {g}: {a} vs {b}");
    }
}

#[test]
fn waterfilling_against_grid_search() {
    for (l1, l2, g) in [(3.0, 0.2, 2.0), (1.0, 1.0, 0.5), (7.0, 0.05, 0.3)] {
        let w = waterfilling_capacity(&[l1, l2], g).unwrap();
        let best = (0..=20_000)
            .map(|k| {
                let q = k as f64 * 1e-4;
                0.5 * ((1.0 + g * q * l1).log2() + (1.0 + g * (2.0 - q) * l2).log2())
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((w.capacity - best).abs() < 1e-6);
        assert!(w.capacity >= best - 1e-12);
    }
}

#[test]
fn waterfilling_is_uniform_at_high_snr() {
    let s = empirical_spectrum(&EnsembleSpec::iid_complex(128, 64).unwrap(), 4).unwrap();
    let w = waterfilling_capacity(s.eigenvalues(), 1e6).unwrap();
    assert!(w.allocation.iter().all(|q| (q - 1.0).abs() < 1e-3));
}

#[test]
fn estimates_do_not_depend_on_scheduling() {
    let spec = EnsembleSpec::iid_complex(3, 2).unwrap();
    let parallel = ergodic_mutual_info(&spec, None, 10.0, 64, 99).unwrap();
    let serial: Vec<f64> = (0..64)
        .map(|i| mutual_info_finite(&sample_matrix(&spec, trial_seed(99, i)).unwrap(), 10.0).unwrap())
        .collect();
    assert_eq!(parallel, ErgodicEstimate::from_samples(&serial, 99).unwrap());
}

#[test]
fn small_system_against_larger_reference_run() {
    // 2 x 2 complex at 30 dB: 10^5 trials against an independent 10^6-trial run
    let spec = EnsembleSpec::iid_complex(2, 2).unwrap();
    let e = ergodic_mutual_info(&spec, None, 1e3, 100_000, 1).unwrap();
    let reference = ergodic_map(&spec, 1_000_000, 2, |h| {
        let s = h.gram_spectrum()?;
        Ok(s.average(|x| (1.0 + 1e3 * x).log2()))
    })
    .unwrap();
    assert!((e.mean - reference.mean).abs() < 3.0 * (e.stderr + reference.stderr));
}

#[test]
fn receive_loss_is_nonnegative_per_trial() {
    let spec = EnsembleSpec::new(EnsembleKind::IidComplexGaussian, 6, 3, 6.0).unwrap();
    let proj = ProjectorSpec::receive(0.5).unwrap();
    for i in 0..200 {
        let h = sample_matrix(&spec, trial_seed(5, i)).unwrap();
        for g in [1.0, 1e3] {
            let l = mimo_scaling::montecarlo::paired_loss(&h, &proj, g).unwrap();
            assert!(l >= -1e-12, "trial {i}: {l}");
        }
    }
}

#[test]
fn small_system_loss_at_30_db() {
    // unit-variance 4 x 2, two receive antennas removed, 30 dB
    let spec = EnsembleSpec::new(EnsembleKind::IidComplexGaussian, 4, 2, 4.0).unwrap();
    let proj = ProjectorSpec::receive(0.5).unwrap();
    let e = ergodic_loss(&spec, &proj, 1e3, 20_000, 7).unwrap();
    assert!((2.0 * e.mean - 3.4).abs() < 0.1, "{e:?}");
}

#[test]
fn zero_channel() {
    let z = ChannelMatrix::zeros(3, 3).unwrap();
    assert_eq!(z.gram_spectrum().unwrap().rank_measure(), 0.0);
}
