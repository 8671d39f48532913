//! Desk-scale reproduction experiments, runnable one by one or together.
//! Each writes its configs into a work directory and drives the same
//! command functions as the CLI.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Serialize;
use wssl_core::datagen::{
    default_scope, sample_manipulator, sample_rng, spherical_wrist_spec, SubspaceDescriptor,
};
use wssl_core::kinematics::{
    differential_motion, forward_kinematics, inverse_kinematics, DhRow, IkOutcome, IkSettings,
    JointConfig, Manipulator,
};
use wssl_core::slnet::{
    forward, gradient, init_parameters, loss_expectation_check, objective, read_bank, write_bank,
    BankEntry, Batch, LossKind, NetArchitecture, Optimizer, OutputLink, SubspaceBank, TrainConfig,
};
use wssl_core::workspace::{flatten, unflatten, ScopeMode};

use crate::commands::{cmd_bench, cmd_eval, cmd_generate, cmd_train, cmd_workspace};
use crate::config::{
    self, BenchConfig, EvalConfig, GenerateConfig, Preset, ScopeConfig, Subset, TrainCmdConfig,
    WorkspaceConfig,
};
use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub criterion: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {} {:<16} {}  {}",
            self.criterion,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

/// Writes `cfg` as TOML to `dir/name`, reads it back through the config
/// loader, and returns the parsed value.
fn staged<T: Serialize + DeserializeOwned>(dir: &Path, name: &str, cfg: &T) -> CliResult<T> {
    let path = dir.join(name);
    let text = toml::to_string(cfg)
        .map_err(|e| CliError::runtime(format!("cannot serialize {name}: {e}")))?;
    std::fs::write(&path, text)
        .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display())))?;
    config::load(&path)
}

fn subdir(workdir: &Path, name: &str) -> CliResult<PathBuf> {
    let dir = workdir.join(name);
    std::fs::create_dir_all(&dir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir)
}

pub const LEARNING_SAMPLES: usize = 6000;
pub const LEARNING_EPOCHS: usize = 300;
pub const LEARNING_GATE: f64 = 0.90;

fn learning_generate(seed: u64) -> GenerateConfig {
    GenerateConfig {
        output: "data.wssl".into(),
        n: LEARNING_SAMPLES,
        seed,
        beta: 0.5,
        spec: None,
        subspace_id: "spherical_wrist".into(),
        output_slice: None,
        scope: ScopeConfig::cube(1.0, 0.5),
        ik: IkSettings::default(),
        csv: None,
    }
}

fn train_config(
    bank: &str,
    log: &str,
    optimizer: Optimizer,
    epochs: usize,
    seed: u64,
    hidden: Vec<usize>,
) -> TrainCmdConfig {
    TrainCmdConfig {
        dataset: "data.wssl".into(),
        bank: bank.into(),
        log: log.into(),
        hidden_sizes: hidden,
        split: [0.7, 0.15, 0.15],
        split_seed: seed,
        input_dim: None,
        output_dim: None,
        train: TrainConfig {
            optimizer,
            loss: LossKind::Mse,
            epochs,
            seed,
            ..Default::default()
        },
    }
}

fn test_f(dir: &Path, bank: &str, split_seed: u64) -> CliResult<f64> {
    let cfg = EvalConfig {
        bank: bank.into(),
        dataset: "data.wssl".into(),
        id: None,
        threshold: 0.5,
        subset: Subset::Test,
        split: [0.7, 0.15, 0.15],
        split_seed,
        report: Some(format!("{bank}.eval.toml").into()),
    };
    let cfg = staged(dir, &format!("eval_{bank}.toml"), &cfg)?;
    Ok(cmd_eval(&cfg, dir)?.metrics.f_measure)
}

/// Generates the shared learning dataset unless it is already present.
fn learning_dir(workdir: &Path, seed: u64) -> CliResult<PathBuf> {
    let dir = subdir(workdir, "learning")?;
    if !dir.join("data.wssl").exists() {
        let cfg = staged(&dir, "generate.toml", &learning_generate(seed))?;
        cmd_generate(&cfg, &dir)?;
    }
    Ok(dir)
}

pub fn learning(workdir: &Path, seed: u64) -> CliResult<Outcome> {
    let dir = learning_dir(workdir, seed)?;
    let cfg = train_config(
        "rprop.slbank",
        "rprop_log.csv",
        Optimizer::Rprop,
        LEARNING_EPOCHS,
        seed,
        vec![40, 40],
    );
    let cfg = staged(&dir, "train_rprop.toml", &cfg)?;
    let summary = cmd_train(&cfg, &dir)?;
    let f = test_f(&dir, "rprop.slbank", seed)?;
    Ok(Outcome {
        criterion: 1,
        name: "learning",
        passed: f >= LEARNING_GATE,
        detail: format!(
            "test F = {f:.4} (gate >= {LEARNING_GATE}), {} samples, {} epochs in {:.1} s",
            LEARNING_SAMPLES, LEARNING_EPOCHS, summary.seconds
        ),
    })
}

pub fn optimizers(workdir: &Path, seed: u64) -> CliResult<Outcome> {
    let dir = learning_dir(workdir, seed)?;
    let mut wins = 0;
    let mut rows = Vec::new();
    for k in 0..5 {
        let s = seed + k;
        let mut scores = [0.0; 2];
        for (slot, (name, opt)) in [
            ("rprop", Optimizer::Rprop),
            ("gd", Optimizer::GradientDescent),
        ]
        .into_iter()
        .enumerate()
        {
            let bank = format!("{name}_{s}.slbank");
            let _ = std::fs::remove_file(dir.join(&bank));
            // Same split for every run; only the initialisation seed varies.
            let mut cfg = train_config(
                &bank,
                &format!("{name}_{s}_log.csv"),
                opt,
                LEARNING_EPOCHS,
                s,
                vec![40, 40],
            );
            cfg.split_seed = seed;
            let cfg = staged(&dir, &format!("train_{name}_{s}.toml"), &cfg)?;
            cmd_train(&cfg, &dir)?;
            scores[slot] = test_f(&dir, &bank, seed)?;
        }
        // An undefined F means no positive was predicted; it ranks lowest.
        let [r, g] = scores.map(|f| if f.is_nan() { 0.0 } else { f });
        if r > g {
            wins += 1;
        }
        rows.push(format!("{:.3}/{:.3}", scores[0], scores[1]));
    }
    Ok(Outcome {
        criterion: 2,
        name: "optimizers",
        passed: wins >= 4,
        detail: format!(
            "Rprop beats fixed-rate GD in {wins}/5 seeds (Rprop/GD F: {})",
            rows.join(", ")
        ),
    })
}

pub const RUNTIME_GATE: f64 = 100.0;

pub fn runtime(workdir: &Path, seed: u64) -> CliResult<Outcome> {
    let dir = subdir(workdir, "runtime")?;
    let gen = GenerateConfig {
        n: 16,
        scope: ScopeConfig::cube(1.0, 0.1),
        ..learning_generate(seed)
    };
    let gen = staged(&dir, "generate.toml", &gen)?;
    cmd_generate(&gen, &dir)?;
    let _ = std::fs::remove_file(dir.join("bank.slbank"));
    let train = staged(
        &dir,
        "train.toml",
        &train_config(
            "bank.slbank",
            "log.csv",
            Optimizer::Rprop,
            30,
            seed,
            vec![40, 40],
        ),
    )?;
    cmd_train(&train, &dir)?;
    let bench = BenchConfig {
        bank: "bank.slbank".into(),
        id: None,
        repetitions: 5,
        seed,
        scope: ScopeConfig::cube(1.0, 0.1),
        ik: IkSettings::default(),
        threshold: 0.5,
        report: Some("bench.toml".into()),
    };
    let bench = staged(&dir, "bench.toml.in", &bench)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let report = pool.install(|| cmd_bench(&bench, &dir))?;
    Ok(Outcome {
        criterion: 3,
        name: "runtime",
        passed: report.speedup >= RUNTIME_GATE,
        detail: format!(
            "{} nodes: classical {:.3e} s, network {:.3e} s, speedup {:.0}x (gate >= {RUNTIME_GATE}x)",
            report.nodes, report.classical.mean, report.network.mean, report.speedup
        ),
    })
}

pub fn ik_round_trip(seed: u64) -> CliResult<Outcome> {
    let scope = default_scope(0.5, 0.5)?;
    let spec = spherical_wrist_spec(0.5, &scope)?;
    let ik = IkSettings::default();
    let trials = 500;
    let mut ok = 0;
    for i in 0..trials {
        let mut rng = sample_rng(seed, i);
        let (m, _) = sample_manipulator(&spec, &mut rng)?;
        let q: Vec<f64> = (0..m.dof()).map(|_| rng.random_range(-PI..PI)).collect();
        let target = forward_kinematics(&m, &JointConfig(q))?;
        if let IkOutcome::Solved { q, .. } = inverse_kinematics(&m, &target, &ik)? {
            if differential_motion(&forward_kinematics(&m, &q)?, &target).norm() <= ik.tolerance {
                ok += 1;
            }
        }
    }
    let rate = ok as f64 / trials as f64;
    Ok(Outcome {
        criterion: 4,
        name: "ik_round_trip",
        passed: rate >= 0.99,
        detail: format!("{ok}/{trials} targets recovered within tolerance (gate >= 99%)"),
    })
}

pub fn annulus(workdir: &Path) -> CliResult<Outcome> {
    let dir = subdir(workdir, "annulus")?;
    // A 2R arm plus a zero-length wrist joint, so the fixed identity
    // orientation is attainable anywhere in the annulus 0.4 <= r <= 2.
    let (a1, a2) = (1.2, 0.8);
    let m = Manipulator::new(vec![
        DhRow::new(0.0, 0.0, a1, 0.0),
        DhRow::new(0.0, 0.0, a2, 0.0),
        DhRow::new(0.0, 0.0, 0.0, 0.0),
    ])?;
    let scope = ScopeConfig {
        min: [-2.5, -2.5, 0.0],
        max: [2.5, 2.5, 0.0],
        delta: [0.1, 0.1, 1.0],
        fixed: [0.0; 3],
        mode: ScopeMode::ConstantOrientation,
    };
    let cfg = WorkspaceConfig {
        manipulator: m,
        scope: scope.clone(),
        ik: IkSettings::default(),
        prefilter: true,
        bits: "annulus.bits".into(),
        csv: "annulus.csv".into(),
    };
    let cfg = staged(&dir, "workspace.toml", &cfg)?;
    cmd_workspace(&cfg, &dir)?;
    let bits = std::fs::read_to_string(dir.join("annulus.bits"))
        .map_err(|e| CliError::runtime(e.to_string()))?;
    let scope = scope.build()?;
    let (lx, ly, _) = scope.dims();
    let mut agree = 0;
    for (c, b) in bits.trim().chars().enumerate() {
        let (i, j) = (c / ly, c % ly);
        let (x, y) = (scope.axes[0][i], scope.axes[1][j]);
        let r = x.hypot(y);
        agree += usize::from((b == '1') == ((a1 - a2) <= r && r <= a1 + a2));
    }
    let rate = agree as f64 / (lx * ly) as f64;
    Ok(Outcome {
        criterion: 5,
        name: "annulus",
        passed: rate >= 0.98,
        detail: format!(
            "{agree}/{} nodes agree with the analytic annulus ({:.2}%, gate >= 98%)",
            lx * ly,
            100.0 * rate
        ),
    })
}

/// Relative error floor for components whose true value is near zero.
pub const GRADIENT_FLOOR: f64 = 1e-3;

pub fn gradient_check(seed: u64) -> CliResult<Outcome> {
    let h = 1e-5;
    let archs = [
        NetArchitecture::new(3, vec![5], 2)?,
        NetArchitecture::new(4, vec![6, 4], 3)?,
        NetArchitecture::new(2, vec![4, 5, 3], 4)?,
    ];
    let mut worst = 0.0f64;
    let mut checked = 0;
    for arch in &archs {
        for s in seed..seed + 3 {
            for loss in [LossKind::Mse, LossKind::Mae, LossKind::CrossEntropy] {
                let mut rng = ChaCha8Rng::seed_from_u64(s);
                let n = 8;
                let x = DMatrix::from_fn(arch.input_dim, n, |_, _| rng.random_range(-1.0..1.0));
                let y = DMatrix::from_fn(arch.output_dim, n, |_, _| {
                    f64::from(u8::from(rng.random_bool(0.4)))
                });
                let batch = Batch::new(x, y)?;
                let cfg = TrainConfig {
                    loss,
                    l2_coefficient: 1e-3,
                    ..Default::default()
                };
                let p = init_parameters(arch, s);
                let g = gradient(arch, &p, &batch, &cfg)?.to_flat();
                for (i, gi) in g.iter().enumerate() {
                    let mut step = vec![0.0; g.len()];
                    step[i] = h;
                    let mut plus = p.clone();
                    plus.add_flat(&step);
                    step[i] = -h;
                    let mut minus = p.clone();
                    minus.add_flat(&step);
                    let fd = (objective(arch, &plus, &batch, &cfg)?
                        - objective(arch, &minus, &batch, &cfg)?)
                        / (2.0 * h);
                    worst = worst.max((fd - gi).abs() / gi.abs().max(fd.abs()).max(GRADIENT_FLOOR));
                    checked += 1;
                }
            }
        }
    }
    Ok(Outcome {
        criterion: 6,
        name: "gradient",
        passed: worst <= 1e-5,
        detail: format!("max relative error {worst:.2e} over {checked} components (gate <= 1e-5)"),
    })
}

pub fn loss_expectation(seed: u64) -> CliResult<Outcome> {
    let arch = NetArchitecture::new(3, vec![8, 6], 1)?;
    let model = init_parameters(&arch, seed);
    let teacher = init_parameters(&arch, seed + 1000);
    let target =
        |x: &[f64]| -> DVector<f64> { forward(&arch, &teacher, x).expect("shapes fixed above") };
    let r = loss_expectation_check(&arch, &model, target, 10_000, seed)?;
    let gap = (r.lhs - r.rhs).abs();
    Ok(Outcome {
        criterion: 7,
        name: "loss_expectation",
        passed: gap <= 3.0 * r.stderr,
        detail: format!(
            "subspace {:.5}, full {:.5}, |diff| {gap:.2e} vs 3 stderr {:.2e}",
            r.lhs,
            r.rhs,
            3.0 * r.stderr
        ),
    })
}

fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path)
        .map_err(|e| CliError::runtime(format!("cannot read {}: {e}", path.display())))
}

pub fn determinism(workdir: &Path, seed: u64) -> CliResult<Outcome> {
    let dir = subdir(workdir, "determinism")?;
    let mut failures = Vec::new();

    let mut datasets = Vec::new();
    for name in ["a", "b"] {
        let cfg = GenerateConfig {
            output: format!("{name}.wssl").into(),
            n: 24,
            ..learning_generate(seed)
        };
        let cfg = staged(&dir, &format!("generate_{name}.toml"), &cfg)?;
        cmd_generate(&cfg, &dir)?;
        datasets.push(read_bytes(&dir.join(format!("{name}.wssl")))?);
    }
    if datasets[0] != datasets[1] {
        failures.push("dataset bytes differ");
    }

    let mut banks = Vec::new();
    for name in ["a", "b"] {
        let bank = format!("{name}.slbank");
        let _ = std::fs::remove_file(dir.join(&bank));
        let mut cfg = train_config(
            &bank,
            &format!("{name}_log.csv"),
            Optimizer::Rprop,
            20,
            seed,
            vec![8],
        );
        cfg.dataset = "a.wssl".into();
        let cfg = staged(&dir, &format!("train_{name}.toml"), &cfg)?;
        cmd_train(&cfg, &dir)?;
        banks.push(read_bytes(&dir.join(&bank))?);
    }
    if banks[0] != banks[1] {
        failures.push("bank bytes differ");
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut flatten_ok = true;
    for _ in 0..200 {
        let dims = (
            rng.random_range(1..12),
            rng.random_range(1..12),
            rng.random_range(1..12),
        );
        let bits: Vec<bool> = (0..dims.0 * dims.1 * dims.2)
            .map(|_| rng.random_bool(0.3))
            .collect();
        flatten_ok &= flatten(&unflatten(dims, bits.clone())?) == bits;
    }
    if !flatten_ok {
        failures.push("flatten/unflatten");
    }

    let scope = default_scope(0.5, 0.5)?;
    let spec = spherical_wrist_spec(0.5, &scope)?;
    let mut bank_ok = true;
    for _ in 0..50 {
        let hidden: Vec<usize> = (0..rng.random_range(0..4))
            .map(|_| rng.random_range(1..10))
            .collect();
        let mut bank = SubspaceBank::new(hidden)?;
        for k in 0..rng.random_range(1..4) {
            let lo = rng.random_range(1..=125);
            let hi = rng.random_range(lo..=125);
            let descriptor = SubspaceDescriptor::new(format!("s{k}"), spec.clone(), [lo, hi])?;
            let mut params = init_parameters(&bank.architecture(&descriptor), rng.random());
            for v in params.iter_mut() {
                *v += rng.random_range(-1.0..1.0);
            }
            let link = if rng.random_bool(0.5) {
                OutputLink::Identity
            } else {
                OutputLink::Logistic
            };
            bank.insert(BankEntry {
                descriptor,
                link,
                params,
            })?;
        }
        let text = write_bank(&bank)?;
        let back = read_bank(&text)?;
        bank_ok &= back == bank && write_bank(&back)? == text;
    }
    if !bank_ok {
        failures.push("bank save/load");
    }

    Ok(Outcome {
        criterion: 8,
        name: "determinism",
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            "dataset and bank files byte-identical; 200 flatten and 50 bank round trips exact"
                .to_string()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    })
}

pub fn run_preset(preset: Preset, workdir: &Path, seed: u64) -> CliResult<Vec<Outcome>> {
    std::fs::create_dir_all(workdir)
        .map_err(|e| CliError::runtime(format!("cannot create {}: {e}", workdir.display())))?;
    Ok(match preset {
        Preset::Learning => vec![learning(workdir, seed)?],
        Preset::Optimizers => vec![optimizers(workdir, seed)?],
        Preset::Runtime => vec![runtime(workdir, seed)?],
        Preset::IkRoundTrip => vec![ik_round_trip(seed)?],
        Preset::Annulus => vec![annulus(workdir)?],
        Preset::Gradient => vec![gradient_check(seed)?],
        Preset::LossExpectation => vec![loss_expectation(seed)?],
        Preset::Determinism => vec![determinism(workdir, seed)?],
        Preset::All => vec![
            learning(workdir, seed)?,
            optimizers(workdir, seed)?,
            runtime(workdir, seed)?,
            ik_round_trip(seed)?,
            annulus(workdir)?,
            gradient_check(seed)?,
            loss_expectation(seed)?,
            determinism(workdir, seed)?,
        ],
    })
}
