use std::fs;
use std::path::Path;

use anyhow::{anyhow, Context};
use log::{info, warn};
use serde_json::json;

use fuzzymon::data::{encode_all, read_records, split, write_records_to, FeatureSchema, Format, ObservationVector, RawRecord, ReadMode};
use fuzzymon::engine::{load_state, save_state, FuzzyMonitorModel, Hyperparameters};
use fuzzymon::evidence::{shortlist_clouds, SafetyCaseParams, Verdict};
use fuzzymon::odd::{derive_odd, emit, filter_records, parse, DeriveOptions};
use fuzzymon::sim::{generate, records, SimConfig};
use fuzzymon::workflow::{self, BenchmarkSetup};

use crate::{
    BenchmarkArgs, Command, EvidenceArgs, OddCheckArgs, OddCommand, OddDeriveArgs, OutputFormat, SimulateArgs, SplitArgs,
    Thresholds, TrainArgs,
};

pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

const USAGE: u8 = 1;
const DATA: u8 = 2;
const ACCEPTANCE: u8 = 3;

trait Classify<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail(code: u8, msg: String) -> Failure {
    Failure {
        code,
        error: anyhow!(msg),
    }
}

pub fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Simulate(a) => simulate(a),
        Command::Split(a) => split_cmd(a),
        Command::Train(a) => train(a),
        Command::Evidence(a) => evidence(a),
        Command::Odd(OddCommand::Derive(a)) => odd_derive(a),
        Command::Odd(OddCommand::Check(a)) => odd_check(a),
        Command::Benchmark(a) => benchmark(a),
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_exit(DATA)
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .with_context(|| format!("cannot write {}", path.display()))
        .or_exit(DATA)
}

fn read_data(path: &Path, lenient: bool) -> Result<Vec<RawRecord>, Failure> {
    let mode = if lenient { ReadMode::Collect } else { ReadMode::FailFast };
    let out = read_records(path, Format::from_path(path), mode)
        .with_context(|| format!("reading {}", path.display()))
        .or_exit(DATA)?;
    for e in &out.errors {
        warn!("{}: skipped {e}", path.display());
    }
    Ok(out.records)
}

fn encode_data(path: &Path, schema: &FeatureSchema, lenient: bool) -> Result<Vec<ObservationVector>, Failure> {
    let recs = read_data(path, lenient)?;
    let (obs, dropped) = encode_all(&recs, schema);
    if dropped > 0 {
        warn!("{}: dropped {dropped} records that do not fit the schema", path.display());
    }
    Ok(obs)
}

fn load_model(path: &Path) -> Result<FuzzyMonitorModel, Failure> {
    load_state(&read_text(path)?)
        .with_context(|| format!("loading model {}", path.display()))
        .or_exit(DATA)
}

fn load_schema(path: &Path) -> Result<FeatureSchema, Failure> {
    let schema = FeatureSchema::from_json(&read_text(path)?)
        .with_context(|| format!("parsing schema {}", path.display()))
        .or_exit(DATA)?;
    let violations = schema.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(fail(DATA, format!("invalid schema: {}", list.join("; "))));
    }
    Ok(schema)
}

fn simulate(a: SimulateArgs) -> Result<(), Failure> {
    let mut config = match &a.config {
        Some(p) => SimConfig::from_json(&read_text(p)?)
            .with_context(|| format!("parsing scenario {}", p.display()))
            .or_exit(DATA)?,
        None => SimConfig::driving_default(),
    };
    if let Some(s) = a.seed {
        config.seed = s;
    }
    if let Some(e) = a.episodes {
        config.episodes = e;
    }
    let episodes = generate(&config).or_exit(USAGE)?;
    let recs = records(&episodes);
    let crashes: usize = episodes
        .iter()
        .map(|e| e.crashes(config.k_track, config.k_crash).len())
        .sum();
    info!("{} episodes, {} frames, {crashes} crash events", episodes.len(), recs.len());
    write_records_to(&a.out, &recs).or_exit(DATA)?;
    if let Some(p) = &a.schema_out {
        write_text(p, &(config.schema.to_json() + "\n"))?;
    }
    Ok(())
}

fn split_cmd(a: SplitArgs) -> Result<(), Failure> {
    if !(a.fraction > 0.0 && a.fraction < 1.0) {
        return Err(fail(USAGE, format!("--fraction must lie in (0, 1), got {}", a.fraction)));
    }
    let recs = read_data(&a.data, false)?;
    let (train, val) = split(&recs, a.fraction, a.seed).or_exit(DATA)?;
    info!("{} training and {} validation records", train.len(), val.len());
    write_records_to(&a.train_out, &train).or_exit(DATA)?;
    write_records_to(&a.val_out, &val).or_exit(DATA)
}

fn apply_thresholds(p: &mut Hyperparameters, t: &Thresholds) -> Result<(), Failure> {
    if let Some(v) = t.omega0 {
        p.omega0 = v;
    }
    if let Some(v) = t.merge_threshold {
        p.merge_threshold = v;
    }
    if let Some(v) = t.util_threshold {
        p.util_threshold = v;
    }
    if let Some(v) = t.min_support {
        p.min_support_eval = v;
    }
    if let Some(v) = t.window {
        p.window = v;
    }
    if let Some(v) = t.accuracy_target {
        p.accuracy_target = v;
    }
    if let Some(v) = t.var_floor_ratio {
        p.var_floor_ratio = v;
    }
    if let Some(v) = t.belonging_threshold {
        p.belonging_threshold = v;
    }
    p.validate().or_exit(USAGE)
}

fn train(a: TrainArgs) -> Result<(), Failure> {
    let mut model = if a.resume {
        let mut m = load_model(&a.model)?;
        apply_thresholds(&mut m.params, &a.thresholds)?;
        info!("resuming at n={} with {} clouds", m.global.n_seen, m.clouds.len());
        m
    } else {
        let path = a
            .schema
            .as_ref()
            .ok_or_else(|| fail(USAGE, "--schema is required unless --resume is given".into()))?;
        let schema = load_schema(path)?;
        let mut params = Hyperparameters::default();
        apply_thresholds(&mut params, &a.thresholds)?;
        FuzzyMonitorModel::new(schema, params, a.seed).or_exit(USAGE)?
    };
    let data = encode_data(&a.data, &model.schema, a.lenient)?;
    if data.is_empty() {
        return Err(fail(DATA, format!("{} holds no usable records", a.data.display())));
    }
    let summary = workflow::train(&mut model, &data, a.log_every).or_exit(DATA)?;
    info!(
        "trained on {} samples: {} clouds ({} created, {} merged, {} pruned)",
        summary.samples,
        model.clouds.len(),
        summary.created,
        summary.merged,
        summary.pruned
    );
    write_text(&a.model, &save_state(&model))?;

    let acc = summary.final_accuracy;
    let target = model.params.accuracy_target;
    let ok = acc.window_full && acc.windowed.is_some_and(|w| w >= target);
    if ok {
        info!("windowed accuracy {:.4} meets the target {target}", acc.windowed.unwrap_or(0.0));
        return Ok(());
    }
    let msg = match acc.windowed {
        Some(w) if acc.window_full => format!("windowed accuracy {w:.4} is below the target {target}"),
        _ => "the accuracy window is not full yet".to_string(),
    };
    if a.allow_low_accuracy {
        warn!("{msg}");
        Ok(())
    } else {
        Err(fail(ACCEPTANCE, msg))
    }
}

fn evidence(a: EvidenceArgs) -> Result<(), Failure> {
    let model = load_model(&a.model)?;
    let params = SafetyCaseParams {
        gamma_c: a.gamma_c,
        gamma_cr: a.gamma_cr,
        speed_kmh: a.speed,
        frame_rate: a.fps,
        spacing_m: a.spacing,
        q: a.shortlist.q,
    };
    params.validate().or_exit(USAGE)?;
    if !(0.0..=1.0).contains(&a.shortlist.max_mp_rate) {
        return Err(fail(USAGE, "--max-mp-rate must lie in [0, 1]".into()));
    }
    let data = match &a.data {
        Some(p) => Some(encode_data(p, &model.schema, false)?),
        None => None,
    };
    let out = workflow::evidence(&model, data.as_deref(), a.shortlist.max_mp_rate, &params).or_exit(DATA)?;
    let text = match a.format {
        OutputFormat::Json => out.report.to_json(),
        OutputFormat::Text => out.report.to_text(),
    };
    write_text(&a.out, &text)?;
    info!(
        "gamma_A = {:.4e}, gamma_res = {:.4e} ({} included, {} excluded)",
        out.case.gamma_a,
        out.case.gamma_res,
        out.shortlist.included.len(),
        out.shortlist.excluded.len()
    );
    match out.case.verdict {
        Verdict::Acceptable => Ok(()),
        Verdict::Unacceptable => Err(fail(
            ACCEPTANCE,
            format!("gamma_A = {:.4e} exceeds gamma_C = {:.4e}", out.case.gamma_a, out.case.gamma_c),
        )),
    }
}

fn odd_derive(a: OddDeriveArgs) -> Result<(), Failure> {
    if !(a.threshold > 0.0 && a.threshold <= 1.0) {
        return Err(fail(USAGE, "--threshold must lie in (0, 1]".into()));
    }
    let model = load_model(&a.model)?;
    let shortlist = shortlist_clouds(&model, a.shortlist.q, a.shortlist.max_mp_rate).or_exit(USAGE)?;
    let options = DeriveOptions {
        group: a.group,
        threshold: a.threshold,
    };
    let spec = derive_odd(&model, &shortlist, &model.schema, &options).or_exit(DATA)?;
    info!(
        "{} include statements, {} exclude blocks",
        spec.includes.len(),
        spec.excludes.len()
    );
    write_text(&a.out, &emit(&spec))
}

fn odd_check(a: OddCheckArgs) -> Result<(), Failure> {
    let spec = parse(&read_text(&a.odd)?)
        .with_context(|| format!("parsing {}", a.odd.display()))
        .or_exit(DATA)?;
    let schema = load_schema(&a.schema)?;
    spec.validate(&schema).or_exit(DATA)?;
    let recs = read_data(&a.data, false)?;
    let filter = filter_records(&spec, &recs, &schema).or_exit(DATA)?;
    info!(
        "{} of {} records within the ODD (retention {:.4})",
        filter.retained(),
        filter.total(),
        filter.retention()
    );
    let kept: Vec<RawRecord> = filter.apply(&recs).into_iter().cloned().collect();
    write_records_to(&a.out, &kept).or_exit(DATA)?;
    if let Some(p) = &a.summary {
        let summary = json!({
            "total": filter.total(),
            "retained": filter.retained(),
            "retention": filter.retention(),
        });
        let text = serde_json::to_string_pretty(&summary).or_exit(DATA)? + "\n";
        write_text(p, &text)?;
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&a.random_p) {
        return Err(fail(USAGE, "--random-p must lie in [0, 1]".into()));
    }
    let model = load_model(&a.model)?;
    let train = encode_data(&a.train, &model.schema, false)?;
    let val = encode_data(&a.data, &model.schema, false)?;
    let spec = match &a.odd {
        Some(p) => {
            let s = parse(&read_text(p)?)
                .with_context(|| format!("parsing {}", p.display()))
                .or_exit(DATA)?;
            s.validate(&model.schema).or_exit(DATA)?;
            Some(s)
        }
        None => None,
    };
    let setup = BenchmarkSetup {
        seed: a.seed,
        random_p: a.random_p,
        tree_depth: a.tree_depth,
        tree_min_leaf: a.min_leaf,
    };
    let report = workflow::run_benchmark(&model, &train, &val, spec.as_ref(), &setup).or_exit(DATA)?;
    info!(
        "scored {} of {} validation records (retention {:.4})",
        report.evaluated, report.total, report.retention
    );
    let text = match a.format {
        OutputFormat::Json => report.to_json(),
        OutputFormat::Text => report.to_text(),
    };
    write_text(&a.out, &text)
}
