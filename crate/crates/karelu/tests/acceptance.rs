//! Acceptance suite: one test per certification criterion, each printing a
//! PASS line with the measured quantities when run with --nocapture.

use karelu::digits::{DigitSequence, GridPoint};
use karelu::encodings::{inverse_holder_exponent, phi_combine, phi_inverse, psi_deinterleave, psi_interleave, CantorCode};
use karelu::measure::{bad_set_intervals, certification_bound, default_grid_bits, lp_error, rate_fit, ErrorReport};
use karelu::outer::{build_interpolant, ka_approx_eval, lipschitz_audit_pwc, outer_g_eval, HolderFunction, PiecewiseConstantFunction};
use karelu::registry;
use karelu::relunet::{assemble_full, build_bit_extractor, full_architecture, load_network, save_network, st_recursion_reference, BitExtractorPlan, NetworkMeta, BUILDER_VERSION};
use num::rational::BigRational;
use num::ToPrimitive;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Enumerate every length-`len` digit sequence in the given base.
fn all_sequences(base: u32, len: usize) -> Vec<DigitSequence> {
    let count = (base as u64).pow(len as u32);
    (0..count)
        .map(|mut m| {
            let mut digits = vec![0u32; len];
            for slot in digits.iter_mut().rev() {
                *slot = (m % base as u64) as u32;
                m /= base as u64;
            }
            DigitSequence::new(base, digits).unwrap()
        })
        .collect()
}

/// Ternary numerator of the Cantor code with bit pattern `index`:
/// Σ 2 t_j 3^{len-j}, so the code value is numerator / 3^len.
fn cantor_numerator(index: u64, len: usize) -> u64 {
    (0..len).fold(0u64, |acc, i| acc * 3 + 2 * ((index >> (len - 1 - i)) & 1))
}

#[test]
fn criterion_01_encoding_bijectivity_exhaustive() {
    let mut checked = 0usize;
    for base in [2u32, 3] {
        for k in 1..=4usize {
            let seqs = all_sequences(base, k);
            for a in &seqs {
                for b in &seqs {
                    let point = GridPoint::new(vec![a.clone(), b.clone()]).unwrap();
                    let code = psi_interleave(&point, k);
                    assert_eq!(psi_deinterleave(&code, 2).unwrap(), point);
                    if base == 2 {
                        let cantor = phi_combine(&point, k).unwrap();
                        assert_eq!(phi_inverse(&cantor, 2).unwrap(), point);
                    }
                    checked += 1;
                }
            }
        }
    }
    println!("criterion 1 PASS: exhaustive bijectivity on {checked} grid points (d=2, B in {{2,3}}, K<=4)");
}

#[test]
fn criterion_02_holder_transfer_and_sharpness() {
    let len = 12usize;
    let denom = 3f64.powi(len as i32);
    let mut worst_slack = f64::INFINITY;
    for d in [2usize, 3] {
        let alpha = inverse_holder_exponent(d);
        for f in registry::sweep_functions(d) {
            let scale = 2f64.powf(f.beta()) * f.holder_constant();
            let mut rng = ChaCha8Rng::seed_from_u64(0xACCE97 + d as u64);
            for _ in 0..100_000 {
                let a: u64 = rng.random_range(0..1u64 << len);
                let b: u64 = rng.random_range(0..1u64 << len);
                let x = CantorCode::from_index(a, len);
                let y = CantorCode::from_index(b, len);
                let gx = outer_g_eval(&f, &x).unwrap();
                let gy = outer_g_eval(&f, &y).unwrap();
                let lhs = (gx - gy).abs();
                let gap = cantor_numerator(a, len).abs_diff(cantor_numerator(b, len)) as f64 / denom;
                let rhs = scale * gap.powf(f.beta() * alpha);
                assert!(
                    lhs <= rhs,
                    "transfer violated for {} d={d}: |g| gap {lhs} vs {rhs}",
                    f.name()
                );
                if rhs > 0.0 {
                    worst_slack = worst_slack.min(rhs - lhs);
                }
            }
        }
    }

    // Sharpness sequences x_k = 0, y_k = 2/3^{kd} for f(x) = x_d.
    let mut worst_rel = 0.0f64;
    for d in [2usize, 3] {
        let alpha = inverse_holder_exponent(d);
        let f = HolderFunction::coordinate(d, d - 1);
        for k in 1..=8usize {
            let x = CantorCode::from_index(0, k * d);
            let y = CantorCode::from_index(1, k * d);
            let lhs = (outer_g_eval(&f, &x).unwrap() - outer_g_eval(&f, &y).unwrap()).abs();
            let gap = 2.0 / 3f64.powi((k * d) as i32);
            let rhs = (gap / 2.0).powf(alpha);
            let rel = (lhs - rhs).abs() / rhs;
            worst_rel = worst_rel.max(rel);
            assert!(rel <= 1e-12, "sharpness k={k} d={d}: {lhs} vs {rhs}");
        }
    }
    println!(
        "criterion 2 PASS: 10^5 Cantor pairs x 5 functions x d in {{2,3}} transfer-clean \
         (tightest slack {worst_slack:.3e}); sharpness equality within rel {worst_rel:.2e}"
    );
}

#[test]
fn criterion_03_truncation_envelope_and_decay() {
    let d = 2usize;
    for f in registry::sweep_functions(d) {
        let beta = f.beta();
        let mut max_errs = Vec::new();
        for k in 2..=8usize {
            let side = 1usize << k;
            let step = (side as f64).recip();
            let mut max_err = 0.0f64;
            for l1 in 0..side {
                for l2 in 0..side {
                    let x = [(l1 as f64 + 0.5) * step, (l2 as f64 + 0.5) * step];
                    let err = (ka_approx_eval(&f, &x, k).unwrap() - f.eval(&x)).abs();
                    max_err = max_err.max(err);
                }
            }
            let envelope = f.holder_constant() * 2f64.powf(-beta * (k as f64 - 4.0));
            assert!(
                max_err <= envelope,
                "{} K={k}: max err {max_err} vs envelope {envelope}",
                f.name()
            );
            max_errs.push(max_err);
        }
        // Decay factor per unit K for K >= 4 (indices 2.. hold K = 4..8).
        let lo = 2f64.powf(-1.5 * beta) * (1.0 - 1e-9);
        let hi = 2f64.powf(-0.5 * beta) * (1.0 + 1e-9);
        for k in 4..8usize {
            let ratio = max_errs[k - 1] / max_errs[k - 2];
            assert!(
                (lo..=hi).contains(&ratio),
                "{} K={} -> {}: decay {ratio} outside [{lo}, {hi}]",
                f.name(),
                k,
                k + 1
            );
        }
        println!(
            "criterion 3 [{}]: envelope respected for K=2..8, decay ratios within [2^-1.5b, 2^-0.5b]",
            f.name()
        );
    }
    println!("criterion 3 PASS");
}

#[test]
fn criterion_04_sup_norm_equality() {
    let d = 2usize;
    for f in registry::sweep_functions(d) {
        for k in 1..=6usize {
            let kd = k * d;
            let mut max_g = 0.0f64;
            for m in 0..1u64 << kd {
                let code = CantorCode::from_index(m, kd);
                max_g = max_g.max(outer_g_eval(&f, &code).unwrap().abs());
            }
            let side = 1usize << k;
            let mut max_f = 0.0f64;
            for l1 in 0..side {
                for l2 in 0..side {
                    let anchor = [l1 as f64 / side as f64, l2 as f64 / side as f64];
                    max_f = max_f.max(f.eval(&anchor).abs());
                }
            }
            assert_eq!(
                max_g.to_bits(),
                max_f.to_bits(),
                "{} K={k}: {max_g} vs {max_f}",
                f.name()
            );
        }
    }
    println!("criterion 4 PASS: sup-norm equality bit-for-bit, 5 functions, d=2, K<=6");
}

#[test]
fn criterion_05_lipschitz_transfer_bound() {
    let d = 2usize;
    let mut audits = 0usize;
    for k in [1u32, 2] {
        for seed in 0..10u64 {
            let table = PiecewiseConstantFunction::random(k, d, seed);
            let audit = lipschitz_audit_pwc(&table, 10_000, 1000 + seed);
            assert!(
                audit.holds(),
                "k={k} seed={seed}: ratio {} exceeds bound {}",
                audit.max_ratio,
                audit.bound
            );
            audits += 1;
        }
    }
    println!("criterion 5 PASS: {audits} piecewise-constant audits within 2*sup*3^kd, 10^4 pairs each");
}

#[test]
fn criterion_06_extractor_network_vs_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0B17);
    for k in 2..=8usize {
        let plan = BitExtractorPlan::new(k, 2, 1.0, 2.0).unwrap();
        let net = build_bit_extractor(&plan);
        let tol = 1e-9 * 2f64.powi(plan.r);
        let mut worst = 0.0f64;
        for _ in 0..10_000 {
            let x: f64 = rng.random_range(0.0..1.0);
            let got = net.eval_scalar(&[x]).unwrap();
            let want = st_recursion_reference(x, k, plan.r, plan.d).phi_k;
            let dev = (got - want).abs();
            worst = worst.max(dev);
            assert!(dev <= tol, "K={k} x={x}: deviation {dev} > {tol}");
        }
        println!("criterion 6 [K={k}]: 10^4 samples, worst deviation {worst:.3e} <= {tol:.3e}");
    }
    println!("criterion 6 PASS");
}

#[test]
fn criterion_07_architecture_and_weight_bounds() {
    let p = 2.0f64;
    let mut count = 0usize;
    for d in [2usize, 3] {
        for k in 2..=6usize {
            if k * d > 16 {
                continue;
            }
            for f in registry::sweep_functions(d) {
                let net = assemble_full(&f, k, p).unwrap();
                assert_eq!(net.architecture(), full_architecture(d, k), "{} d={d} K={k}", f.name());
                let bound = 2.0
                    * (k as f64).max(f.sup_norm())
                    * 2f64.powf(k as f64 * (d as f64).max(p * f.beta()));
                let max_w = net.max_abs_weight();
                assert!(
                    max_w <= bound,
                    "{} d={d} K={k}: max weight {max_w} vs bound {bound}",
                    f.name()
                );
                count += 1;
            }
        }
    }
    println!("criterion 7 PASS: {count} assemblies match (2K+3,(d,4d,...,4d,d,1,2^Kd+1,1)) and weight bound");
}

#[test]
fn criterion_08_bad_set_geometry() {
    for k in 1..=6usize {
        let r = k as i32 + 4;
        let report = bad_set_intervals(k, r);
        assert!(report.within_measure_bound(), "K={k}: total exceeds K*2^-r");

        let grid_log2 = (r + k as i32 + 2) as u32;
        let n_grid = 1u64 << grid_log2;
        let scale = BigRational::from(num::BigInt::from(n_grid));
        let scaled: Vec<(u64, u64)> = report
            .intervals
            .iter()
            .map(|(a, b)| {
                let lo = (a * &scale).to_integer();
                let hi = (b * &scale).to_integer();
                assert_eq!(BigRational::from(lo.clone()), a * &scale, "endpoint off-grid");
                (lo.to_u64().unwrap(), hi.to_u64().unwrap())
            })
            .collect();

        // Brute-force tail-distance oracle on the aligned grid.
        let half = n_grid / 2;
        let tolerance = 1u64 << (grid_log2 - r as u32 - 1);
        let mut brute = 0u64;
        for i in 0..n_grid {
            let bad = (1..=k as u32).any(|j| ((i << j) & (n_grid - 1)).abs_diff(half) < tolerance);
            if bad {
                brute += 1;
            }
            let listed = scaled.iter().any(|&(lo, hi)| lo < i && i < hi);
            assert_eq!(listed, bad, "K={k} grid point {i}");
        }
        let interior: u64 = scaled.iter().map(|&(lo, hi)| hi - lo - 1).sum();
        assert_eq!(brute, interior);
        println!(
            "criterion 8 [K={k}]: {} intervals match brute force on 2^{grid_log2} grid, measure {} <= K*2^-{r}",
            report.intervals.len(),
            report.total_measure_f64()
        );
    }
    println!("criterion 8 PASS");
}

#[test]
fn criterion_09_lp_certification_and_rate() {
    let d = 2usize;
    for f in registry::sweep_functions(d) {
        for p in [1.0f64, 2.0] {
            let mut reports = Vec::new();
            for k in 3..=7usize {
                let net = assemble_full(&f, k, p).unwrap();
                let grid_bits = default_grid_bits(k, d);
                let measured = lp_error(&f, &net, p, grid_bits).unwrap();
                let bound = certification_bound(&f, k);
                assert!(
                    measured <= bound,
                    "{} p={p} K={k}: L^p error {measured} vs bound {bound}",
                    f.name()
                );
                let plan = BitExtractorPlan::new(k, d, f.beta(), p).unwrap();
                reports.push(ErrorReport {
                    function: f.name().to_string(),
                    d,
                    k,
                    p,
                    beta: f.beta(),
                    q: f.holder_constant(),
                    measured_lp: measured,
                    bound,
                    max_weight: net.max_abs_weight(),
                    bad_set_measure: bad_set_intervals(k, plan.r).total_measure,
                    grid_bits,
                });
            }
            let slope = rate_fit(&reports).unwrap();
            assert!(
                (slope + f.beta()).abs() <= 0.3,
                "{} p={p}: rate slope {slope} vs -beta {}",
                f.name(),
                -f.beta()
            );
            println!(
                "criterion 9 [{} p={p}]: certified for K=3..7, rate slope {slope:.3} ~ {:.1}",
                f.name(),
                -f.beta()
            );
        }
    }
    println!("criterion 9 PASS");
}

#[test]
fn criterion_10_serialization_round_trip() {
    let dir = std::env::temp_dir().join("karelu-acceptance");
    std::fs::create_dir_all(&dir).unwrap();
    let mut nets = Vec::new();
    for f in registry::sweep_functions(2) {
        nets.push((f.name().to_string(), f.clone(), 2usize, assemble_full(&f, 3, 2.0).unwrap()));
    }
    let f3 = registry::get("coord1", 3, 0).unwrap();
    nets.push(("coord1-d3".into(), f3.clone(), 3, assemble_full(&f3, 3, 2.0).unwrap()));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5E71A);
    for (tag, f, d, net) in &nets {
        let plan = BitExtractorPlan::new(3, *d, f.beta(), 2.0).unwrap();
        let meta = NetworkMeta {
            function: f.name().to_string(),
            d: *d,
            k: 3,
            p: 2.0,
            beta: f.beta(),
            q: f.holder_constant(),
            r: plan.r,
            builder_version: BUILDER_VERSION.to_string(),
            seed: None,
        };
        let path = dir.join(format!("{tag}.json"));
        save_network(&path, net, &meta).unwrap();
        let (loaded, _) = load_network(&path).unwrap();
        for _ in 0..1000 {
            let x: Vec<f64> = (0..*d).map(|_| rng.random_range(0.0..1.0)).collect();
            let a = net.eval_scalar(&x).unwrap();
            let b = loaded.eval_scalar(&x).unwrap();
            assert_eq!(a.to_bits(), b.to_bits(), "{tag} at {x:?}");
        }
        std::fs::remove_file(&path).unwrap();
    }
    println!(
        "criterion 10 PASS: save/load/eval bit-identical on 10^3 points for {} networks",
        nets.len()
    );
}

#[test]
fn breakpoint_gap_audit() {
    // Companion to criterion 1: interpolation grid geometry for K*d <= 12.
    for (k, d) in [(6usize, 2usize), (4, 3), (5, 2), (3, 4)] {
        let kd = k * d;
        let g = build_interpolant(&HolderFunction::coordinate(d, 0), k).unwrap();
        assert_eq!(g.breakpoints().len(), (1usize << kd) + 1);
        let exact: Vec<BigRational> = (0..1u64 << kd)
            .map(|m| CantorCode::from_index(m, kd).value_rational())
            .chain([BigRational::from(num::BigInt::from(1))])
            .collect();
        let exact_min = exact.windows(2).map(|w| &w[1] - &w[0]).min().unwrap();
        assert_eq!(
            exact_min,
            BigRational::new(1.into(), num::BigInt::from(3).pow(kd as u32))
        );
    }
}
