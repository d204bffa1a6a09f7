//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach stdout.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use ffm_core::ingest::load_local_corpus;
use ffm_core::keywords::{build_matrix, Lexicon};
use ffm_core::linalg::Matrix;
use ffm_core::market::{moments_of, population_excess_kurtosis};
use ffm_core::period::DateRange;
use ffm_core::regression::student_t::{two_tailed_critical, two_tailed_p};
use ffm_core::regression::{correlation_matrix, flag_for_p, ols, RegressionResult, Significance, INTERCEPT};
use ffm_core::report::{format_coefficient_cell, render_correlation_markdown, render_regression_markdown, render_var_explained};
use ffm_core::spectral::{build_factors, decompose, select_rank, RankRule};
use ffm_core::Mat;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < limit, format!("took {took:?}, limit {limit:?}"))?;
    Ok(took)
}

fn random_matrix(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> Mat {
    let n = rng.gen_range(1..=max_rows);
    let p = rng.gen_range(1..=max_cols);
    Matrix::from_fn(n, p, |_, _| rng.gen_range(-10.0..=10.0))
}

const REFERENCE_DUMMY_VE: [f64; 21] = [
    0.592, 0.071, 0.053, 0.044, 0.035, 0.032, 0.029, 0.026, 0.018, 0.017, 0.015, 0.014, 0.012, 0.011, 0.009, 0.007,
    0.006, 0.005, 0.002, 0.002, 0.001,
];
const REFERENCE_COUNT_VE: [f64; 21] = [
    0.581, 0.342, 0.042, 0.018, 0.006, 0.005, 0.003, 0.001, 0.001, 0.001, 0.001, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0,
    0.0, 0.0, 0.0,
];

fn energy_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for case in 0..200 {
        let x = random_matrix(&mut rng, 200, 50);
        let svd = decompose(&x).map_err(|e| format!("case {case}: {e}"))?;
        let energy = x.frobenius_sq();
        let s2: f64 = svd.s.iter().map(|s| s * s).sum();
        let rel = (s2 - energy).abs() / energy;
        worst = worst.max(rel);
        check(rel <= 1e-10, format!("case {case}: relative gap {rel:e}"))?;
    }
    let took = within_time(start, Duration::from_secs(10))?;
    Ok(format!("200 cases, worst relative gap {worst:.2e}, {took:.2?}"))
}

fn max_orthonormal_residual(m: &Mat) -> f64 {
    let g = m.transpose().matmul(m);
    let eye = Matrix::identity(g.nrows());
    g.sub(&eye).max_abs()
}

fn svd_contract() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let start = Instant::now();
    let (mut orth, mut recon) = (0.0f64, 0.0f64);
    for case in 0..200 {
        let x = random_matrix(&mut rng, 200, 50);
        let svd = decompose(&x).map_err(|e| format!("case {case}: {e}"))?;
        let o = max_orthonormal_residual(&svd.u).max(max_orthonormal_residual(&svd.v));
        let r = svd.reconstruct().sub(&x).max_abs();
        orth = orth.max(o);
        recon = recon.max(r);
        check(o <= 1e-8, format!("case {case}: orthonormality residual {o:e}"))?;
        check(r <= 1e-9, format!("case {case}: reconstruction residual {r:e}"))?;
        check(
            svd.s.windows(2).all(|w| w[0] >= w[1]),
            format!("case {case}: singular values increase"),
        )?;
    }
    let took = within_time(start, Duration::from_secs(10))?;
    Ok(format!("200 cases, orthonormality {orth:.2e}, reconstruction {recon:.2e}, {took:.2?}"))
}

fn factor_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut scaled, mut ortho, mut norm) = (0.0f64, 0.0f64, 0.0f64);
    for case in 0..100 {
        let x = random_matrix(&mut rng, 200, 50);
        let svd = decompose(&x).map_err(|e| format!("case {case}: {e}"))?;
        let k = svd.positive_count();
        let f = build_factors(&x, &svd, k, "acceptance").map_err(|e| format!("case {case}: {e}"))?;
        let cols: Vec<Vec<f64>> = (0..k).map(|j| f.factors.column(j)).collect();
        for j in 0..k {
            let u = svd.u_col(j);
            let root = svd.s[j].sqrt();
            let d = cols[j].iter().zip(&u).map(|(a, b)| (a - root * b).abs()).fold(0.0, f64::max);
            scaled = scaled.max(d);
            check(d <= 1e-10, format!("case {case} F{j}: |F - sqrt(s) u| = {d:e}"))?;
            let n2: f64 = cols[j].iter().map(|v| v * v).sum();
            let g = (n2 - svd.s[j]).abs();
            norm = norm.max(g);
            check(g <= 1e-10, format!("case {case} F{j}: |‖F‖² - s| = {g:e}"))?;
            for i in 0..j {
                let dot: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let ni: f64 = cols[i].iter().map(|v| v * v).sum::<f64>().sqrt();
                let rel = dot.abs() / (ni * n2.sqrt());
                ortho = ortho.max(rel);
                check(rel <= 1e-8, format!("case {case}: F{i}·F{j} relative {rel:e}"))?;
            }
        }
    }
    Ok(format!(
        "100 cases, scaling {scaled:.2e}, orthogonality {ortho:.2e}, squared norm {norm:.2e}"
    ))
}

fn rank_rule() -> Outcome {
    let k_dummy = select_rank(&REFERENCE_DUMMY_VE, RankRule::Threshold(0.05)).map_err(|e| e.to_string())?;
    check(k_dummy == 3, format!("dummy threshold 0.05 gave {k_dummy}"))?;
    let k_count = select_rank(&REFERENCE_COUNT_VE, RankRule::Fixed(3)).map_err(|e| e.to_string())?;
    check(k_count == 3, format!("count fixed(3) gave {k_count}"))?;
    Ok("dummy threshold 0.05 -> 3, count fixed(3) -> 3".into())
}

struct Oracle {
    beta: Vec<f64>,
    se: Vec<f64>,
    t: Vec<f64>,
    r2: f64,
    adj: f64,
}

/// Normal equations with the intercept as the last column.
fn normal_equations(y: &[f64], x: &Mat) -> Oracle {
    let (n, p) = (x.nrows(), x.ncols());
    let a = DMatrix::from_fn(n, p + 1, |i, j| if j < p { x[(i, j)] } else { 1.0 });
    let yv = DVector::from_column_slice(y);
    let xtx_inv = (a.transpose() * &a).cholesky().expect("positive definite").inverse();
    let beta = &xtx_inv * a.transpose() * &yv;
    let resid = &yv - &a * &beta;
    let rss = resid.dot(&resid);
    let mean = yv.mean();
    let tss: f64 = y.iter().map(|v| (v - mean) * (v - mean)).sum();
    let dof = (n - p - 1) as f64;
    let sigma2 = rss / dof;
    let se: Vec<f64> = (0..=p).map(|j| (sigma2 * xtx_inv[(j, j)]).sqrt()).collect();
    let beta: Vec<f64> = beta.iter().copied().collect();
    let t = beta.iter().zip(&se).map(|(b, s)| b / s).collect();
    let r2 = 1.0 - rss / tss;
    Oracle {
        beta,
        se,
        t,
        r2,
        adj: 1.0 - (1.0 - r2) * (n as f64 - 1.0) / dof,
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

fn ols_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (n, p) = (109, 21);
    let labels: Vec<String> = (0..p).map(|j| format!("x{j}")).collect();
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut planted_worst = 0.0f64;
    for case in 0..100 {
        let dummies = case % 2 == 0;
        let x: Mat = Matrix::from_fn(n, p, |_, _| {
            if dummies {
                f64::from(u8::from(rng.gen_bool(0.4)))
            } else {
                rng.gen_range(-3.0..3.0)
            }
        });
        let planted = case % 5 == 0;
        let truth: Vec<f64> = (0..=p).map(|_| rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let signal: f64 = (0..p).map(|j| truth[j] * x[(i, j)]).sum::<f64>() + truth[p];
                if planted {
                    signal
                } else {
                    signal + rng.gen_range(-5.0..5.0)
                }
            })
            .collect();
        let fit: RegressionResult<f64> = ols(&y, &x, &labels).map_err(|e| format!("case {case}: {e}"))?;
        check(fit.term_labels.len() == p + 1, format!("case {case}: unexpected drop {:?}", fit.dropped_columns))?;
        if planted {
            for (j, (b, t)) in fit.coefficients.iter().zip(&truth).enumerate() {
                let e = rel_err(*b, *t);
                planted_worst = planted_worst.max(e);
                check(e <= 1e-10, format!("case {case}: planted coefficient {j} off by {e:e}"))?;
            }
            continue;
        }
        let o = normal_equations(&y, &x);
        for j in 0..=p {
            let t = fit.t_stats[j].ok_or_else(|| format!("case {case}: missing t-stat {j}"))?;
            for (what, got, want) in [
                ("coef", fit.coefficients[j], o.beta[j]),
                ("se", fit.standard_errors[j], o.se[j]),
                ("t", t, o.t[j]),
            ] {
                let e = rel_err(got, want);
                worst = worst.max(e);
                check(e <= 1e-8, format!("case {case}: {what}[{j}] relative error {e:e}"))?;
            }
        }
        for (what, got, want) in [("R2", fit.r_squared, o.r2), ("adj R2", fit.adj_r_squared, o.adj)] {
            let e = rel_err(got, want);
            worst = worst.max(e);
            check(e <= 1e-8, format!("case {case}: {what} relative error {e:e}"))?;
        }
    }
    let took = within_time(start, Duration::from_secs(30))?;
    Ok(format!(
        "100 problems, worst relative error {worst:.2e}, planted recovery {planted_worst:.2e}, {took:.2?}"
    ))
}

fn student_t() -> Outcome {
    let c: f64 = two_tailed_critical(0.10, 87.0);
    check((c - 1.6626).abs() <= 5e-4, format!("critical value {c}"))?;
    let p = two_tailed_p(c, 87.0);
    check((p - 0.10).abs() < 1e-10, format!("p at critical value {p}"))?;
    Ok(format!("t(87) two-tailed 10% critical value {c:.6}"))
}

fn random_phrase_text(rng: &mut ChaCha8Rng, phrases: &[String]) -> String {
    const FILLER: [&str; 8] = ["the", "company", "reported", "results", "risk", "factors", "board", "annual"];
    let mut words: Vec<String> = Vec::new();
    for _ in 0..rng.gen_range(0..60) {
        if rng.gen_bool(0.2) {
            words.push(phrases[rng.gen_range(0..phrases.len())].clone());
        } else {
            words.push(FILLER[rng.gen_range(0..FILLER.len())].to_string());
        }
    }
    let text: String = words.join(if rng.gen_bool(0.5) { " " } else { "  " });
    text.chars()
        .map(|c| if rng.gen_bool(0.3) { c.to_ascii_uppercase() } else { c })
        .collect()
}

/// Non-overlapping, case-insensitive occurrences, scanning left to right.
fn brute_count(text: &str, phrase: &str) -> u64 {
    let hay = text.to_lowercase();
    let (h, n) = (hay.as_bytes(), phrase.as_bytes());
    let mut i = 0;
    let mut count = 0;
    while i + n.len() <= h.len() {
        if &h[i..i + n.len()] == n {
            count += 1;
            i += n.len();
        } else {
            i += 1;
        }
    }
    count
}

fn dummy_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lexicon = Lexicon::builtin();
    let phrases: Vec<String> = lexicon.entries().iter().map(|e| e.phrase.clone()).collect();
    let period = DateRange::new(
        NaiveDate::from_ymd_opt(2019, 1, 1).unwrap(),
        NaiveDate::from_ymd_opt(2021, 1, 1).unwrap(),
    );
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (mut cells, mut empty) = (0usize, 0usize);
    for case in 0..1000 {
        let root = tmp.path().join(format!("c{case}"));
        let mut entries = Vec::new();
        let mut expected: BTreeMap<String, Vec<u64>> = BTreeMap::new();
        let tickers = rng.gen_range(1..=5);
        for t in 0..tickers {
            let ticker = format!("T{t}");
            let cik = format!("{:010}", 1000 + t);
            for f in 0..rng.gen_range(1..=3) {
                let date = NaiveDate::from_ymd_opt(rng.gen_range(2018..=2021), rng.gen_range(1..=12), 15).unwrap();
                let mut text = random_phrase_text(&mut rng, &phrases);
                if text.is_empty() {
                    text.push('.');
                }
                let acc = format!("{cik}-{f}");
                let rel = format!("{cik}/{acc}.txt");
                fs::create_dir_all(root.join(&cik)).map_err(|e| e.to_string())?;
                fs::write(root.join(&rel), &text).map_err(|e| e.to_string())?;
                if period.contains(date) {
                    let row = expected.entry(ticker.clone()).or_insert_with(|| vec![0; phrases.len()]);
                    for (j, ph) in phrases.iter().enumerate() {
                        row[j] += brute_count(&text, ph);
                    }
                }
                entries.push(serde_json::json!({
                    "ticker": ticker, "cik": cik, "accession": acc, "form_type": "10-K",
                    "filing_date": date.to_string(), "text_path": rel,
                }));
            }
        }
        fs::write(root.join("index.json"), serde_json::json!({ "records": entries }).to_string())
            .map_err(|e| e.to_string())?;
        let corpus = load_local_corpus(&root).map_err(|e| format!("case {case}: {e}"))?;
        let built = build_matrix(&corpus, &lexicon, &period);
        if expected.is_empty() {
            check(built.is_err(), format!("case {case}: empty period accepted"))?;
            empty += 1;
            continue;
        }
        let m = built.map_err(|e| format!("case {case}: {e}"))?.matrix;
        let companies: Vec<String> = expected.keys().cloned().collect();
        check(m.companies == companies, format!("case {case}: rows {:?} vs {companies:?}", m.companies))?;
        let dummy = m.dummy();
        for (i, t) in companies.iter().enumerate() {
            check(m.counts[i] == expected[t], format!("case {case}: {t} counts differ from brute force"))?;
            for j in 0..phrases.len() {
                check(
                    (dummy[i][j] == 1) == (m.counts[i][j] >= 1),
                    format!("case {case}: dummy law broken at ({t}, {})", phrases[j]),
                )?;
                cells += 1;
            }
        }
        fs::remove_dir_all(&root).ok();
    }
    Ok(format!("1000 corpora ({empty} with no filing in the window), {cells} cells"))
}

fn moment_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for case in 0..1000 {
        let n = rng.gen_range(4..=500);
        let scale = 10f64.powi(rng.gen_range(-3..=1));
        let r: Vec<f64> = (0..n)
            .map(|_| {
                let u: f64 = rng.gen_range(-1.0..1.0);
                scale * (u + if rng.gen_bool(0.05) { 5.0 * u * u * u } else { 0.0 })
            })
            .collect();
        let got = moments_of("X", &r).map_err(|e| format!("case {case}: {e}"))?;
        let nf = n as f64;
        let mean = r.iter().sum::<f64>() / nf;
        let ss: f64 = r.iter().map(|v| (v - mean).powi(2)).sum();
        let sd = (ss / (nf - 1.0)).sqrt();
        let z3: f64 = r.iter().map(|v| ((v - mean) / sd).powi(3)).sum();
        let z4: f64 = r.iter().map(|v| ((v - mean) / sd).powi(4)).sum();
        let skew = nf / ((nf - 1.0) * (nf - 2.0)) * z3;
        let kurt = nf * (nf + 1.0) / ((nf - 1.0) * (nf - 2.0) * (nf - 3.0)) * z4
            - 3.0 * (nf - 1.0).powi(2) / ((nf - 2.0) * (nf - 3.0));
        let data_scale = r.iter().map(|v| v.abs()).sum::<f64>() / nf;
        let errs = [
            ("mean", (got.mean - mean).abs() / data_scale),
            ("std", rel_err(got.std, sd)),
            ("skewness", (got.skewness.unwrap() - skew).abs() / skew.abs().max(1.0)),
            ("kurtosis", (got.kurtosis.unwrap() - kurt).abs() / kurt.abs().max(1.0)),
        ];
        for (what, e) in errs {
            worst = worst.max(e);
            check(e <= 1e-12, format!("case {case} (n = {n}): {what} error {e:e}"))?;
        }
    }
    let two_point: Vec<f64> = (0..40).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let k = population_excess_kurtosis(&two_point).unwrap();
    check(k == -2.0, format!("two-point excess kurtosis {k}"))?;
    let adjusted = moments_of("X", &two_point).unwrap().kurtosis.unwrap();
    check(adjusted < 0.0, format!("adjusted two-point kurtosis {adjusted} not negative"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let normal: Vec<f64> = (0..200_000)
        .map(|_| (0..12).map(|_| rng.gen_range(0.0..1.0)).sum::<f64>() - 6.0)
        .collect();
    let g2 = moments_of("N", &normal).unwrap().kurtosis.unwrap();
    check(g2.abs() < 0.15, format!("near-normal sample excess kurtosis {g2}"))?;
    Ok(format!(
        "1000 series, worst error {worst:.2e}; two-point excess kurtosis {k}, near-normal {g2:.3}"
    ))
}

fn golden_run() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = common::golden_config(tmp.path(), |_| {});
    let cfg_s = cfg.to_str().unwrap();
    let bundle = tmp.path().join("reports/golden");

    let start = Instant::now();
    check(common::cli(&["analyze", "--config", cfg_s]) == 0, "analyze failed")?;
    let took = within_time(start, Duration::from_secs(5))?;
    let first = common::snapshot(&bundle);

    fs::remove_dir_all(&bundle).map_err(|e| e.to_string())?;
    check(common::cli(&["analyze", "--config", cfg_s]) == 0, "second analyze failed")?;
    check(common::snapshot(&bundle) == first, "repeat run differs")?;

    fs::remove_dir_all(&bundle).map_err(|e| e.to_string())?;
    for stage in ["scan", "matrix", "moments", "svd", "factors", "regress", "report"] {
        check(common::cli(&[stage, "--config", cfg_s]) == 0, format!("stage {stage} failed"))?;
    }
    let staged = common::snapshot(&bundle);
    let diff: Vec<&String> = first
        .keys()
        .chain(staged.keys())
        .filter(|k| first.get(*k) != staged.get(*k))
        .collect();
    check(diff.is_empty(), format!("staged run differs in {diff:?}"))?;

    let mut raw_labels = Lexicon::builtin().labels();
    raw_labels.push(INTERCEPT.to_string());
    let factor_labels: Vec<String> = ["F0", "F1", "F2", INTERCEPT].iter().map(|s| s.to_string()).collect();
    let mut tables = 0;
    for (name, bytes) in &first {
        let Some(stem) = name.strip_prefix("regressions/").and_then(|n| n.strip_suffix(".md")) else {
            continue;
        };
        let terms = common::table_terms(std::str::from_utf8(bytes).unwrap());
        let want = if stem.contains("_raw_") { &raw_labels } else { &factor_labels };
        check(&terms == want, format!("{name}: rows {terms:?}"))?;
        tables += 1;
    }
    check(tables == 8, format!("{tables} regression tables, expected 8"))?;
    Ok(format!(
        "{} files byte-identical across runs and staged execution, {tables} tables (22 raw / 4 factor rows), {took:.2?}",
        first.len()
    ))
}

fn format_anchors() -> Outcome {
    let p = two_tailed_p(4.045, 87.0);
    let flag = flag_for_p(Some(p), 0.90);
    check(flag == Significance::HighlySignificant, format!("t = 4.045 flagged {flag:?}"))?;
    let cell = format_coefficient_cell(0.0029, Some(4.045), flag);
    check(cell == "**0.0029 (4.045)***", format!("cell {cell}"))?;
    let plain = format_coefficient_cell(0.0003, Some(0.402), flag_for_p(Some(two_tailed_p(0.402, 87.0)), 0.90));
    check(plain == "0.0003 (0.402)", format!("plain cell {plain}"))?;

    let result = RegressionResult {
        dependent: "E[R]".into(),
        term_labels: vec!["emissions".into(), INTERCEPT.into()],
        coefficients: vec![0.0029, 0.0015],
        standard_errors: vec![0.0029 / 4.045, 0.0015 / 3.855],
        t_stats: vec![Some(4.045), Some(3.855)],
        p_values: vec![Some(p), Some(two_tailed_p(3.855, 87.0))],
        r_squared: 0.3,
        adj_r_squared: 0.218,
        n_obs: 109,
        n_regressors: 21,
        rank_deficient: false,
        dropped_columns: vec![],
        condition_number: None,
    };
    let md = render_regression_markdown(&[result], &["E[R]".to_string()], &["emissions".to_string()], 0.90);
    check(md.contains("| emissions | **0.0029 (4.045)*** |"), format!("table row missing:\n{md}"))?;
    check(md.contains("| Model Adj. R2 | 21.8% |"), format!("adjusted R2 row missing:\n{md}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let x: Mat = Matrix::from_fn(30, 5, |_, _| f64::from(u8::from(rng.gen_bool(0.5))));
    let labels: Vec<String> = (0..5).map(|j| format!("k{j}")).collect();
    let table = correlation_matrix(&x, &labels).map_err(|e| e.to_string())?;
    let md = render_correlation_markdown(&table);
    for (i, line) in md.lines().skip(2).enumerate() {
        let cells: Vec<&str> = line.split('|').map(str::trim).filter(|c| !c.is_empty()).skip(1).collect();
        for (j, c) in cells.iter().enumerate() {
            let v: i64 = c.parse().map_err(|_| format!("non-integer correlation cell '{c}'"))?;
            check((-100..=100).contains(&v), format!("cell {v} out of range"))?;
            if i == j {
                check(v == 100, format!("diagonal cell {v}"))?;
            }
        }
    }

    let listing = render_var_explained(&REFERENCE_DUMMY_VE);
    let want = "var_explained = [0.592 0.071 0.053 0.044 0.035 0.032 0.029 0.026 0.018 0.017 0.015 0.014 \
                0.012 0.011 0.009 0.007 0.006 0.005 0.002 0.002 0.001]\n";
    check(listing == want, format!("listing {listing}"))?;
    Ok("coefficient cell, integer-percent correlations, bracketed var_explained".into())
}

fn main() {
    // quiet the default panic hook; failures are reported below
    panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 energy identity", energy_identity),
        ("2 SVD contract", svd_contract),
        ("3 factor identities", factor_identities),
        ("4 rank rule", rank_rule),
        ("5 OLS oracle", ols_oracle),
        ("6 Student-t calibration", student_t),
        ("7 dummy law", dummy_law),
        ("8 moment oracle", moment_oracle),
        ("9 golden run", golden_run),
        ("10 format anchors", format_anchors),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|p| name.contains(p.as_str())) {
            continue;
        }
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
