//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs as a plain binary (no libtest harness) so the verdict lines always
//! show up in `cargo test` output. The slowest checks (full-size runs at
//! n = 10^6 with hundreds of shuffles) only run when `--ignored` or
//! `--include-ignored` is passed:
//!
//! ```text
//! cargo test -p entrate-cli --test acceptance -- --ignored
//! ```

use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use entrate::synth::{
    gen_hidden_dependence, gen_iid_categorical, gen_iid_gaussian, gen_iid_uniform_bytes,
    gen_markov, gen_random_walk_returns, preset_pmf,
};
use entrate::{
    calibrate_overhead, cr_from_entropy_rate, entropy, estimate, independence_test,
    markov_entropy_rate, serial_dependence_curve, CalibrationTable, CodecConfig, MarkovModel, Pmf,
    TestParams,
};

const CALIBRATION_LENGTHS: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
const CALIBRATION_REPS: u32 = 8;
const CALIBRATION_SEED: u64 = 0xCA11;

fn table() -> &'static CalibrationTable {
    static TABLE: OnceLock<CalibrationTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        calibrate_overhead(
            &CALIBRATION_LENGTHS,
            CALIBRATION_REPS,
            &CodecConfig::default(),
            CALIBRATION_SEED,
        )
        .expect("calibration")
    })
}

type Outcome = Result<String, String>;
type Criterion = (&'static str, bool, Box<dyn Fn() -> Outcome>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    format!("error: {e}")
}

// 1. exact identities
fn entropy_identities() -> Outcome {
    let h = entropy(&Pmf::new(vec![0.5, 0.25, 0.125, 0.125]).map_err(fail)?);
    let q = cr_from_entropy_rate(7.484616, 256).map_err(fail)?;
    check(
        h == 1.75 && (q.optimal_cr - 0.064423).abs() <= 1e-6,
        format!("H = {h}, optimal_cr(7.484616, 256) = {:.7}", q.optimal_cr),
    )
}

// 2. seeded categorical source at n = 10^6
fn categorical_convergence() -> Outcome {
    let pmf = preset_pmf(1);
    let opt = cr_from_entropy_rate(entropy(&pmf), 256)
        .map_err(fail)?
        .optimal_cr;
    let sym = gen_iid_categorical(&pmf, 1_000_000, 2).map_err(fail)?;
    let cr = estimate(&sym, table()).map_err(fail)?.corrected_cr;
    // The window is relative to this pmf's own optimum; a fixed band around the
    // reference draw's 0.0644 does not apply to a differently seeded pmf.
    check(
        cr >= opt - 0.007 && cr <= opt + 0.001,
        format!(
            "corrected_cr = {cr:.6}, optimum = {opt:.6}, window [{:.6}, {:.6}]",
            opt - 0.007,
            opt + 0.001
        ),
    )
}

// 3. overhead fraction shrinks with length; uniform bytes are incompressible
fn overhead_pattern() -> Outcome {
    let t = table();
    let f3 = t.overhead_at(1_000).map_err(fail)? / 1e3;
    let f6 = t.overhead_at(1_000_000).map_err(fail)? / 1e6;
    let sym = gen_iid_uniform_bytes(1_000_000, 3).map_err(fail)?;
    let cr = estimate(&sym, t).map_err(fail)?.corrected_cr;
    check(
        f6 < f3 && cr.abs() <= 0.005,
        format!("overhead fraction {f3:.6} (1e3) vs {f6:.6} (1e6); uniform corrected_cr = {cr:.6}"),
    )
}

fn hidden_dependence_power(n: usize, min_cr: f64) -> Outcome {
    let s = gen_hidden_dependence(n, 4).map_err(fail)?;
    let params = TestParams {
        block_size: 2,
        repetitions: 200,
        alpha: 0.01,
        bits: 8,
        seed: 5,
        phase: 0,
    };
    let r = independence_test(&s, &params, table()).map_err(fail)?;
    let cr = r.observed.corrected_cr;
    check(
        r.rejects() && cr >= min_cr,
        format!(
            "n = {n}: corrected_cr = {cr:.4} (need >= {min_cr}), Q(0.01) = {:.4}, p = {:.4}, {}",
            r.q_alpha,
            r.p_value,
            if r.rejects() {
                "reject"
            } else {
                "fail to reject"
            }
        ),
    )
}

// 5. size under the null
fn size_under_null() -> Outcome {
    let seeds = 50;
    let mut rejections = 0;
    for seed in 0..seeds {
        let s = gen_iid_gaussian(10_000, 1000 + seed, 1.0).map_err(fail)?;
        let params = TestParams {
            block_size: 2,
            repetitions: 200,
            alpha: 0.05,
            bits: 8,
            seed: 2000 + seed,
            phase: 0,
        };
        if independence_test(&s, &params, table())
            .map_err(fail)?
            .rejects()
        {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / seeds as f64;
    check(
        rate <= 0.15,
        format!("{rejections}/{seeds} rejections, rate {rate:.2} (need <= 0.15)"),
    )
}

// 6. compression estimate against the analytic Markov rate
fn markov_oracle() -> Outcome {
    let m = MarkovModel::sticky(256, 0.9).map_err(fail)?;
    let h = markov_entropy_rate(&m);
    let sym = gen_markov(&m, 1_000_000, 6).map_err(fail)?;
    let est = estimate(&sym, table()).map_err(fail)?.entropy_rate_bits;
    check(
        (est - h).abs() <= 0.15,
        format!(
            "estimate {est:.4} vs rate {h:.4} bits/symbol, |diff| = {:.4}",
            (est - h).abs()
        ),
    )
}

// 7. the serial dependence function finds the pair structure
fn sdf_structure() -> Outcome {
    let s = gen_hidden_dependence(100_000, 7).map_err(fail)?;
    let c = serial_dependence_curve(&s, &[1, 2, 3], 100, 8, 8, table()).map_err(fail)?;
    let [m1, m2, m3] = [0, 1, 2].map(|i| c.distributions[i].summary.mean);
    let sd2 = c.distributions[1].summary.sd;
    check(
        m2 - m1 >= 0.08 && m3 < m2 - 2.0 * sd2,
        format!("mean CR k=1 {m1:.4}, k=2 {m2:.4} (sd {sd2:.4}), k=3 {m3:.4}"),
    )
}

// 8. random walk: shuffled ranges cover the estimate and zero. The range is
// the min/max of 1000 shuffles per block size; with far fewer shuffles the
// observed value of an exchangeable series lands outside ~2/m of the time.
fn brownian_null() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (n, seed) in [(10_000, 9), (100_000, 10)] {
        let s = gen_random_walk_returns(n, seed, 1.0).map_err(fail)?;
        let c = serial_dependence_curve(&s, &[1, 2, 5, 10], 1000, 8, seed + 100, table())
            .map_err(fail)?;
        let obs = c.observed.corrected_cr;
        for d in &c.distributions {
            let (lo, hi) = (d.summary.min, d.summary.max);
            if !(lo <= obs && obs <= hi && lo <= 0.0 && 0.0 <= hi) {
                ok = false;
                details.push(format!(
                    "n={n} k={}: [{lo:.4}, {hi:.4}] misses {obs:.4} or 0",
                    d.block_size
                ));
            }
        }
        details.push(format!("n={n}: observed {obs:.4}"));
    }
    check(ok, details.join("; "))
}

fn entrate(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_entrate"))
        .current_dir(dir)
        .env_remove("ENTRATE_CALIBRATION_DIR")
        .args(args)
        .output()
        .map_err(fail)?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

// 9. reproducible pipeline outputs
fn pipeline_determinism() -> Outcome {
    let config = serde_json::json!({"steps": [
        ["calibrate", "--lengths", "1000,10000,100000", "--reps", "4", "--seed", "11", "--out", "cal.json"],
        ["generate", "--family", "hidden-dependence", "--n", "20000", "--seed", "12", "--out", "series.csv"],
        ["test", "--input", "series.csv", "--k", "2", "--reps", "100", "--seed", "13",
         "--calibration", "cal.json", "--json", "test.json"],
        ["sdf", "--input", "series.csv", "--block-sizes", "1,2,3,4", "--reps", "50", "--seed", "14",
         "--calibration", "cal.json", "--json", "sdf.json", "--csv", "sdf.csv"],
    ]});
    let runs: Vec<tempfile::TempDir> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().map_err(fail)?;
            std::fs::write(dir.path().join("pipeline.json"), config.to_string()).map_err(fail)?;
            entrate(dir.path(), &["pipeline", "--config", "pipeline.json"])?;
            Ok(dir)
        })
        .collect::<Result<_, String>>()?;
    let files = ["cal.json", "test.json", "sdf.json", "sdf.csv"];
    let mut differing = Vec::new();
    for f in files {
        let a = std::fs::read(runs[0].path().join(f)).map_err(fail)?;
        let b = std::fs::read(runs[1].path().join(f)).map_err(fail)?;
        if a != b {
            differing.push(f);
        }
    }
    check(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} identical across two runs", files.join(", "))
        } else {
            format!("differing outputs: {}", differing.join(", "))
        },
    )
}

// 10. user-supplied price file produces the figure CSVs
fn fixture_figures() -> Outcome {
    let fixture: PathBuf =
        Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/returns_like.csv");
    let fixture = fixture.to_str().ok_or("non-utf8 path")?;
    let dir = tempfile::tempdir().map_err(fail)?;
    let d = dir.path();
    let input = [
        "--input",
        fixture,
        "--column",
        "2",
        "--header",
        "--log-returns",
    ];
    entrate(
        d,
        &[
            "calibrate",
            "--lengths",
            "1000,10000",
            "--reps",
            "4",
            "--seed",
            "1",
            "--out",
            "cal.json",
        ],
    )?;
    entrate(
        d,
        &[&["rankplot"][..], &input, &["--out", "rank.csv"]].concat(),
    )?;
    entrate(
        d,
        &[
            &["sdf"][..],
            &input,
            &["--block-sizes", "1,2,3,5,10", "--reps", "50", "--seed", "2"],
            &["--calibration", "cal.json", "--csv", "sdf.csv"],
        ]
        .concat(),
    )?;
    let data = |f: &str| -> Result<Vec<String>, String> {
        Ok(std::fs::read_to_string(d.join(f))
            .map_err(fail)?
            .lines()
            .filter(|l| !l.starts_with('#'))
            .map(str::to_owned)
            .collect())
    };
    let rank = data("rank.csv")?;
    let sdf = data("sdf.csv")?;
    check(
        rank.first().map(String::as_str) == Some("index,state")
            && rank.len() == 5001
            && sdf.first().map(String::as_str)
                == Some("block_size,mean_cr,q00,q25,q75,q100,sdf_increment,gap")
            && sdf.len() == 6,
        format!(
            "rank plot {} rows, sdf {} rows",
            rank.len() - 1,
            sdf.len() - 1
        ),
    )
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let slow = args
        .iter()
        .any(|a| a == "--ignored" || a == "--include-ignored");
    // libtest-style listing so `cargo test -- --list` keeps working
    if args.iter().any(|a| a == "--list") {
        return;
    }

    let criteria: Vec<Criterion> = vec![
        ("1  entropy identities", false, Box::new(entropy_identities)),
        (
            "2  categorical source converges to optimum",
            false,
            Box::new(categorical_convergence),
        ),
        (
            "3  overhead pattern and incompressible bytes",
            false,
            Box::new(overhead_pattern),
        ),
        (
            "4a hidden dependence detected at n=1e4",
            false,
            Box::new(|| hidden_dependence_power(10_000, 0.10)),
        ),
        (
            "4b hidden dependence at n=1e6",
            true,
            Box::new(|| hidden_dependence_power(1_000_000, 0.40)),
        ),
        ("5  size under iid null", false, Box::new(size_under_null)),
        ("6  Markov oracle", false, Box::new(markov_oracle)),
        (
            "7  SDF recovers pair structure",
            false,
            Box::new(sdf_structure),
        ),
        (
            "8  random-walk null coverage",
            false,
            Box::new(brownian_null),
        ),
        (
            "9  pipeline determinism",
            false,
            Box::new(pipeline_determinism),
        ),
        (
            "10 fixture produces figure CSVs",
            false,
            Box::new(fixture_figures),
        ),
    ];

    let mut failed = 0;
    for (name, is_slow, run) in &criteria {
        if *is_slow && !slow {
            println!("SKIP {name}: slow tier, run with -- --ignored");
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} ({secs:.1}s)"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} ({secs:.1}s)");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
