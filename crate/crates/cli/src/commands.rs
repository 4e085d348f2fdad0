use std::path::{Path, PathBuf};

use serde::Serialize;

use neurocollide::dataset::{
    load_dataset, sample_2d_dataset, sample_robot_dataset, save_dataset, sidecar_path, train_gap_study, Dataset,
    GapStudy, Split,
};
use neurocollide::encoding::{encoded_length, EncodingLevel};
use neurocollide::eval::{
    baseline_accuracy, bench_latency, evaluate_split, export_loss_curves, slice_raster, sweep_levels, uniform_queries,
    BaselineKind, BenchConfig, LatencyMethod, Metrics, SliceRequest, SweepResult, SweepRow,
};
use neurocollide::nn::{accuracy, preset_spec, train_with_progress, Model, TrainConfig, TrainData, PRESET_NAMES};
use neurocollide::robot::{desk_arm, load_robot, save_robot, RobotModel};

use crate::failure::{require_file, Failure};
use crate::manifest::{Manifest, Outputs};
use crate::{
    BenchArgs, EvalArgs, ExportRobotArgs, GapStudyArgs, GenDataArgs, SliceArgs, SourceArgs, SweepArgs, TrainArgs,
    TrainingArgs,
};

type CmdResult = Result<(), Failure>;

fn flags(args: &impl Serialize) -> serde_json::Value {
    serde_json::to_value(args).expect("flags serialize")
}

fn level(l: u32) -> Result<EncodingLevel, Failure> {
    EncodingLevel::new(l).map_err(|e| Failure::input(e.to_string()))
}

fn train_config(t: &TrainingArgs, seed: u64) -> Result<TrainConfig, Failure> {
    let cfg = TrainConfig {
        epochs: t.epochs,
        batch_size: t.batch_size,
        learning_rate: t.learning_rate,
        seed,
        ..TrainConfig::default()
    };
    cfg.validate().map_err(|e| Failure::input(e.to_string()))?;
    Ok(cfg)
}

fn open_robot(path: &Path, outputs: &mut Outputs) -> Result<RobotModel, Failure> {
    require_file(path, "robot")?;
    outputs.input(path)?;
    Ok(load_robot(path)?)
}

fn open_dataset(path: &Path, outputs: &mut Outputs) -> Result<Dataset, Failure> {
    require_file(path, "dataset")?;
    outputs.input(path)?;
    let sidecar = sidecar_path(path);
    require_file(&sidecar, "dataset metadata")?;
    outputs.input(&sidecar)?;
    Ok(load_dataset(path)?)
}

fn open_model(path: &Path, outputs: &mut Outputs) -> Result<Model, Failure> {
    require_file(path, "model")?;
    outputs.input(path)?;
    Ok(Model::load(path)?)
}

/// `<path><suffix>`, keeping the original extension.
fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

enum Source {
    Robot(RobotModel),
    Synthetic2d,
}

impl Source {
    fn open(args: &SourceArgs, outputs: &mut Outputs) -> Result<Self, Failure> {
        match &args.robot {
            Some(path) => Ok(Source::Robot(open_robot(path, outputs)?)),
            None => Ok(Source::Synthetic2d),
        }
    }

    fn sample(&self, n_per_class: usize, seed: u64) -> neurocollide::Result<Dataset> {
        match self {
            Source::Robot(robot) => sample_robot_dataset(robot, n_per_class, seed),
            Source::Synthetic2d => sample_2d_dataset(2 * n_per_class, seed),
        }
    }
}

pub fn gen_data(a: &GenDataArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let source = Source::open(&a.source, outputs)?;
    outputs.seed("seed", a.seed);
    let ds = source.sample(a.n_per_class, a.seed)?;
    outputs.register(&a.out);
    outputs.register(&sidecar_path(&a.out));
    save_dataset(&ds, &a.out)?;
    let back = load_dataset(&a.out)?;
    if back.labels() != ds.labels() || back.features() != ds.features() || back.splits() != ds.splits() {
        return Err(Failure::runtime("written dataset does not read back identically"));
    }
    let c = ds.meta().counts;
    println!(
        "{} rows (train {}+{}, test {}+{}, val {}+{}) -> {}",
        ds.len(),
        c.train[0],
        c.train[1],
        c.test[0],
        c.test[1],
        c.val[0],
        c.val[1],
        a.out.display()
    );
    outputs.finish(&a.out, "gen-data", argv, flags(a))?;
    Ok(())
}

fn curve_csv(train_loss: &[f64], validation_accuracy: &[f64]) -> String {
    let mut out = String::from("epoch,train_loss,validation_accuracy\n");
    for (e, loss) in train_loss.iter().enumerate() {
        match validation_accuracy.get(e) {
            Some(acc) => out.push_str(&format!("{},{loss},{acc}\n", e + 1)),
            None => out.push_str(&format!("{},{loss},\n", e + 1)),
        }
    }
    out
}

pub fn train(a: &TrainArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let ds = open_dataset(&a.data, outputs)?;
    let level = level(a.level)?;
    let cfg = train_config(&a.training, a.seed)?;
    outputs.seed("seed", a.seed);
    let spec = preset_spec(&a.arch, encoded_length(ds.d(), level))?;
    let (xtr, ytr) = ds.encoded::<f32>(Split::Train, level);
    let (xva, yva) = ds.encoded::<f32>(Split::Val, level);
    let (xte, yte) = ds.encoded::<f32>(Split::Test, level);
    let data = TrainData {
        x: xtr.view(),
        y: ytr.view(),
        validation: (!yva.is_empty()).then(|| (xva.view(), yva.view())),
    };
    let every = (cfg.epochs / 10).max(1);
    let (params, curve) = train_with_progress(&spec, data, &cfg, |epoch, c| {
        if (epoch + 1) % every == 0 {
            let loss = c.train_loss.last().copied().unwrap_or(f64::NAN);
            eprintln!("epoch {:>4}/{}  loss {loss:.5}", epoch + 1, cfg.epochs);
        }
    })?;
    let test_accuracy = if yte.is_empty() {
        None
    } else {
        Some(accuracy(&params, xte.view(), yte.view())?)
    };
    let model = Model::new(a.arch.clone(), level, ds.d(), params)?;
    outputs.register(&a.out);
    model.save(&a.out)?;
    if Model::load(&a.out)?.params != model.params {
        return Err(Failure::runtime("written model does not read back identically"));
    }
    let curve_path = with_suffix(&a.out, ".curve.csv");
    outputs.write(&curve_path, curve_csv(&curve.train_loss, &curve.validation_accuracy))?;
    match test_accuracy {
        Some(acc) => println!("test accuracy {acc:.4} -> {}", a.out.display()),
        None => println!("-> {}", a.out.display()),
    }
    outputs.finish(&a.out, "train", argv, flags(a))?;
    Ok(())
}

#[derive(Serialize)]
struct SplitReport {
    split: &'static str,
    accuracy: f64,
    #[serde(flatten)]
    metrics: Metrics,
}

pub fn eval(a: &EvalArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let model = open_model(&a.model, outputs)?;
    let ds = open_dataset(&a.data, outputs)?;
    if model.raw_dim != ds.d() {
        return Err(Failure::input(format!(
            "model expects {} joint values but the dataset has {}",
            model.raw_dim,
            ds.d()
        )));
    }
    let mut reports = Vec::new();
    println!("split  accuracy  tp  tn  fp  fn");
    for split in Split::ALL {
        if ds.indices(split).is_empty() {
            continue;
        }
        let metrics = evaluate_split(&model, &ds, split)?;
        println!(
            "{:<5}  {:.4}  {}  {}  {}  {}",
            split.as_str(),
            metrics.accuracy(),
            metrics.tp,
            metrics.tn,
            metrics.fp,
            metrics.fn_
        );
        reports.push(SplitReport {
            split: split.as_str(),
            accuracy: metrics.accuracy(),
            metrics,
        });
    }
    if let Some(out) = &a.out {
        let json = serde_json::to_string_pretty(&reports).expect("report serializes");
        outputs.write(out, json + "\n")?;
        outputs.finish(out, "eval", argv, flags(a))?;
    }
    Ok(())
}

fn baseline_kind(arch: &str) -> Option<BaselineKind> {
    match arch {
        "knn" => Some(BaselineKind::Knn),
        "gnb" => Some(BaselineKind::Gnb),
        "lda" => Some(BaselineKind::Lda),
        _ => None,
    }
}

pub fn sweep(a: &SweepArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let ds = open_dataset(&a.data, outputs)?;
    let levels = a.levels.iter().map(|&l| level(l)).collect::<Result<Vec<_>, _>>()?;
    if levels.is_empty() {
        return Err(Failure::input("--L-list is empty"));
    }
    let result = if let Some(kind) = baseline_kind(&a.arch) {
        // Classical models are deterministic: one trial per level.
        let mut result = SweepResult::default();
        for &l in &levels {
            let acc = baseline_accuracy(kind, &ds, l)?;
            eprintln!("{l}  accuracy {acc:.4}");
            result.rows.push(SweepRow {
                level: l,
                input_length: encoded_length(ds.d(), l),
                mean_accuracy: acc,
                std_accuracy: 0.0,
                accuracies: vec![acc],
                curves: Vec::new(),
            });
        }
        result
    } else {
        let cfg = train_config(&a.training, a.seed)?;
        outputs.seed("seed", a.seed);
        let mut result = SweepResult::default();
        for &l in &levels {
            let part = sweep_levels(&a.arch, &ds, &[l], a.trials, &cfg)?;
            let row = part.rows.into_iter().next().expect("one level");
            eprintln!("{l}  mean {:.4}  std {:.4}", row.mean_accuracy, row.std_accuracy);
            result.rows.push(row);
        }
        result
    };
    if let Some(dir) = &a.curves_dir {
        std::fs::create_dir_all(dir).map_err(|e| Failure::runtime(format!("{}: {e}", dir.display())))?;
        for row in result.rows.iter().filter(|r| !r.curves.is_empty()) {
            let path = dir.join(format!("L{}.csv", row.level.get()));
            outputs.register(&path);
            export_loss_curves(&row.curves, &path)?;
        }
    }
    outputs.write(&a.out, result.to_csv())?;
    if let Some(best) = result.best() {
        println!("best {} mean accuracy {:.4} -> {}", best.level, best.mean_accuracy, a.out.display());
    }
    outputs.finish(&a.out, "sweep", argv, flags(a))?;
    Ok(())
}

pub fn slice(a: &SliceArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let model = open_model(&a.model, outputs)?;
    let robot = open_robot(&a.robot, outputs)?;
    let dof = robot.dof();
    if model.raw_dim != dof {
        return Err(Failure::input(format!("model expects {} joints, robot has {dof}", model.raw_dim)));
    }
    let &[ja, jb] = a.joints.as_slice() else {
        return Err(Failure::input("--joints takes exactly two joint numbers"));
    };
    if ja == jb || !(1..=dof).contains(&ja) || !(1..=dof).contains(&jb) {
        return Err(Failure::input(format!("--joints must be two distinct numbers in 1..={dof}")));
    }
    let fixed = a.fixed.clone().unwrap_or_else(|| vec![0.0; dof]);
    if fixed.len() != dof {
        return Err(Failure::input(format!("--fixed needs {dof} values, got {}", fixed.len())));
    }
    let req = SliceRequest {
        joints: (ja - 1, jb - 1),
        fixed,
        resolution: a.resolution,
    };
    let raster = slice_raster(&model, &robot, &req)?;
    let counts = raster.counts();
    outputs.write(&a.out, raster.to_ppm())?;
    outputs.write(&with_suffix(&a.out, ".csv"), raster.to_csv())?;
    println!(
        "accuracy {:.4}  tp {}  tn {}  fp {}  fn {} -> {}",
        counts.accuracy(),
        counts.tp,
        counts.tn,
        counts.fp,
        counts.fn_,
        a.out.display()
    );
    outputs.finish(&a.out, "slice", argv, flags(a))?;
    Ok(())
}

enum MethodSpec {
    Oracle,
    Network(String, Model),
}

fn parse_method(s: &str, dof: usize, seed: u64, outputs: &mut Outputs) -> Result<MethodSpec, Failure> {
    if s == "oracle" {
        return Ok(MethodSpec::Oracle);
    }
    if let Some((name, l)) = s.split_once('@') {
        if PRESET_NAMES.contains(&name) {
            let l: u32 = l
                .parse()
                .map_err(|_| Failure::input(format!("`{s}`: encoding level must be an integer")))?;
            let model = Model::untrained(name, level(l)?, dof, seed)?;
            return Ok(MethodSpec::Network(s.to_string(), model));
        }
    }
    let path = Path::new(s);
    if !path.is_file() {
        return Err(Failure::input(format!(
            "`{s}` is neither `oracle`, PRESET@L (presets: {}), nor an existing model file",
            PRESET_NAMES.join(", ")
        )));
    }
    let model = open_model(path, outputs)?;
    if model.raw_dim != dof {
        return Err(Failure::input(format!("{s}: model expects {} joints, robot has {dof}", model.raw_dim)));
    }
    let name = path.file_stem().map_or_else(|| s.to_string(), |n| n.to_string_lossy().into_owned());
    Ok(MethodSpec::Network(name, model))
}

pub fn bench(a: &BenchArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let robot = open_robot(&a.robot, outputs)?;
    outputs.seed("seed", a.seed);
    let specs = a
        .models
        .iter()
        .map(|m| parse_method(m, robot.dof(), a.seed, outputs))
        .collect::<Result<Vec<_>, _>>()?;
    let methods: Vec<LatencyMethod<'_>> = specs
        .iter()
        .map(|m| match m {
            MethodSpec::Oracle => LatencyMethod::Oracle(&robot),
            MethodSpec::Network(name, model) => LatencyMethod::Network {
                name: name.clone(),
                model,
            },
        })
        .collect();
    let queries = uniform_queries(robot.dof(), a.queries, a.seed);
    let cfg = BenchConfig {
        repetitions: a.repetitions,
        batch_sizes: a.batch_sizes.clone(),
    };
    let report = bench_latency(&methods, queries.view(), &cfg)?;
    let csv = report.to_csv();
    print!("{csv}");
    outputs.write(&a.out, csv)?;
    outputs.finish(&a.out, "bench", argv, flags(a))?;
    Ok(())
}

pub fn gap_study(a: &GapStudyArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let source = Source::open(&a.source, outputs)?;
    outputs.seed("seed", a.seed);
    if let Some(&s) = a.sizes.iter().find(|&&s| s % 2 == 1) {
        return Err(Failure::input(format!("size {s} cannot be split evenly between two classes")));
    }
    let study = GapStudy {
        preset: a.arch.clone(),
        level: level(a.level)?,
        sizes: a.sizes.clone(),
        trials: a.trials,
        train: train_config(&a.training, a.seed)?,
        seed: a.seed,
    };
    let rows = train_gap_study(&study, |size, seed| {
        eprintln!("size {size}  seed {seed}");
        source.sample(size / 2, seed)
    })?;
    let mut csv = String::from("size,train_accuracy,test_accuracy,gap\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.size, r.train_accuracy, r.test_accuracy, r.gap));
        println!("size {:>7}  train {:.4}  test {:.4}  gap {:.4}", r.size, r.train_accuracy, r.test_accuracy, r.gap);
    }
    outputs.write(&a.out, csv)?;
    outputs.finish(&a.out, "gap-study", argv, flags(a))?;
    Ok(())
}

pub fn export_robot(a: &ExportRobotArgs, argv: &[String], outputs: &mut Outputs) -> CmdResult {
    let arm = desk_arm();
    for link in arm.links() {
        outputs.register(&a.out.join(format!("{}.obj", link.name)));
    }
    let json = save_robot(&arm, &a.out)?;
    outputs.register(&json);
    if load_robot(&json)?.content_hash() != arm.content_hash() {
        return Err(Failure::runtime("exported robot does not read back identically"));
    }
    println!("{} -> {}", arm.name(), json.display());
    outputs.finish(&json, "export-robot", argv, flags(a))?;
    Ok(())
}

pub fn replay_argv(path: &Path) -> Result<Vec<String>, Failure> {
    require_file(path, "manifest")?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let manifest: Manifest =
        serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    Ok(manifest.argv)
}
