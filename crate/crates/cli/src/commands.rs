// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};

use chatterkit::evaluate::{self, emit_report, Report, ReportFormat};
use chatterkit::features::FeatureMatrix;
use chatterkit::preprocess::DecimationConfig;
use chatterkit::transform;
use chatterkit::{synth, ClassifierKind, Error, FeatureConfig, LabeledDataset, SynthSpec};

use crate::{
    Cli, Command, CvArgs, DumpArgs, EvalArgs, FeaturesArgs, KindArg, PipelineArgs, RankArgs, SynthArgs,
    TransferArgs,
};

pub enum Outcome {
    Done,
    CheckFailed(String),
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Synth(a) => synth_cmd(cli, a),
        Command::Features(a) => features_cmd(cli, a),
        Command::Eval(a) => eval_cmd(cli, a),
        Command::Cv(a) => cv_cmd(cli, a),
        Command::Transfer(a) => transfer_cmd(cli, a),
        Command::RankReport(a) => rank_cmd(cli, a),
        Command::DumpTransform(a) => dump_cmd(cli, a),
    }
}

fn log(msg: impl AsRef<str>) {
    eprintln!("chatterkit: {}", msg.as_ref());
}

fn emit_text(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => evaluate::write_atomic(p, body.as_bytes())?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}

fn emit(out: Option<&Path>, report: &Report) -> Result<()> {
    match out {
        Some(p) => emit_report(report, p, ReportFormat::from_path(p))?,
        None => emit_text(None, &report.to_json()?)?,
    }
    Ok(())
}

impl PipelineArgs {
    fn feature_config(&self) -> Result<FeatureConfig> {
        let mut cfg = FeatureConfig::new(self.n_peaks, self.alpha);
        cfg.mpd_fft = self.mpd_fft;
        cfg.mpd_psd = self.mpd_psd;
        cfg.mpd_acf = self.mpd_acf;
        cfg.max_lag = self.max_lag;
        cfg.validate().map_err(Error::from)?;
        if self.max_lag == Some(0) {
            bail!("featurize: --max-lag must be at least 1");
        }
        Ok(cfg)
    }

    fn decimation(&self) -> Result<DecimationConfig> {
        if !(self.target_rate_hz > 0.0 && self.target_rate_hz.is_finite()) {
            bail!("preprocess: --target-rate-hz {} must be positive", self.target_rate_hz);
        }
        if self.filter_order == 0 {
            bail!("preprocess: --filter-order must be at least 1");
        }
        let cfg = DecimationConfig {
            cutoff_hz: self.cutoff_hz,
            order: self.filter_order,
        };
        let fc = cfg.cutoff_for(self.target_rate_hz);
        if !(fc > 0.0 && fc < self.target_rate_hz / 2.0) {
            bail!(
                "preprocess: cutoff {fc} Hz must lie in (0, {}) Hz, below the target Nyquist frequency",
                self.target_rate_hz / 2.0
            );
        }
        Ok(cfg)
    }

    fn dataset(&self) -> Result<LabeledDataset<f64>> {
        let dec = self.decimation()?;
        let ds: LabeledDataset<f64> = chatterkit::load_manifest(&self.manifest).map_err(Error::from)?;
        log(format!("loaded {} records from {}", ds.len(), self.manifest.display()));
        Ok(chatterkit::decimate_dataset(&ds, self.target_rate_hz, &dec).map_err(Error::from)?)
    }

    /// Validates every setting, then loads, decimates and featurizes.
    fn matrix(&self) -> Result<FeatureMatrix<f64>> {
        let cfg = self.feature_config()?;
        let ds = self.dataset()?;
        let (x, excluded) = chatterkit::build_matrix(&ds, &cfg).map_err(Error::from)?;
        for e in &excluded {
            log(format!("excluded {}: {}", e.record_id, e.reason));
        }
        log(format!("{} rows x {} features", x.n_rows(), x.n_features()));
        Ok(x)
    }
}

fn group_rows(x: &FeatureMatrix<f64>, group: &str) -> Result<FeatureMatrix<f64>> {
    let idx: Vec<usize> = (0..x.n_rows()).filter(|&i| x.rows[i].source.group == group).collect();
    if idx.is_empty() {
        bail!("dataset: no rows in configuration {group:?} (available: {})", x.groups().join(", "));
    }
    Ok(x.select_rows(&idx))
}

/// The requested group, or every group in ascending overhang order.
fn groups(x: &FeatureMatrix<f64>, only: Option<&str>) -> Result<Vec<(String, FeatureMatrix<f64>)>> {
    let mut names = match only {
        Some(g) => vec![g.to_string()],
        None => x.groups(),
    };
    names.sort_by(|a, b| {
        let (fa, fb) = (a.parse::<f64>().unwrap_or(f64::INFINITY), b.parse::<f64>().unwrap_or(f64::INFINITY));
        fa.total_cmp(&fb).then_with(|| a.cmp(b))
    });
    names.into_iter().map(|g| group_rows(x, &g).map(|m| (g, m))).collect()
}

fn check_floor(report: &Report, floor: Option<f64>) -> Outcome {
    let Some(floor) = floor else {
        return Outcome::Done;
    };
    let low: Vec<String> = report
        .evaluations
        .iter()
        .filter(|r| !(r.mean_test >= floor))
        .map(|r| format!("{}/{}/rfe={} mean_test={}", r.config, r.classifier, r.rfe, r.mean_test))
        .chain(
            report
                .transfers
                .iter()
                .filter(|t| !(t.test_accuracy >= floor))
                .map(|t| format!("{}->{}/{}/rfe={} accuracy={}", t.source_config, t.target_config, t.classifier, t.rfe, t.test_accuracy)),
        )
        .collect();
    if low.is_empty() {
        Outcome::Done
    } else {
        Outcome::CheckFailed(format!("below {floor}: {}", low.join("; ")))
    }
}

fn kinds(s: &crate::ModelArgs) -> Result<Vec<ClassifierKind>> {
    s.kinds().map_err(|e| anyhow!("learn: {e}"))
}

fn synth_cmd(cli: &Cli, a: &SynthArgs) -> Result<Outcome> {
    let base = SynthSpec {
        n_per_class: a.n,
        sample_rate_hz: a.sample_rate_hz,
        duration_s: a.duration_s,
        chatter_amp: a.amp,
        noise_std: a.noise,
        seed: cli.seed,
        ..SynthSpec::default()
    };
    let spec_a = SynthSpec {
        chatter_freq_hz: a.freq_a,
        ..base.clone()
    };
    let spec_b = SynthSpec {
        chatter_freq_hz: a.freq_b,
        overhang_cm: SynthSpec::config_b().overhang_cm,
        ..base
    };
    let ds: LabeledDataset<f64> = synth::make_dataset(&spec_a, &spec_b).map_err(Error::from)?;
    let manifest = synth::write_dataset(&ds, &a.out_dir)?;
    log(format!("wrote {} records", ds.len()));
    println!("{}", manifest.display());
    Ok(Outcome::Done)
}

fn features_cmd(cli: &Cli, a: &FeaturesArgs) -> Result<Outcome> {
    let x = a.pipeline.matrix()?;
    let x = match &a.config_id {
        Some(g) => group_rows(&x, g)?,
        None => x,
    };
    emit_text(a.features_out.as_deref().or(cli.out.as_deref()), &x.to_csv())?;
    Ok(Outcome::Done)
}

fn eval_cmd(cli: &Cli, a: &EvalArgs) -> Result<Outcome> {
    let kinds = kinds(&a.model)?;
    let x = a.pipeline.matrix()?;
    let mut report = Report::default();
    for (g, m) in groups(&x, a.config_id.as_deref())? {
        for k in &kinds {
            for rfe in a.model.rfe.settings() {
                log(format!("eval {g} {k} rfe={rfe}"));
                let r = evaluate::repeated_split_eval(&m, k, rfe, a.reps, a.test_frac, cli.seed)
                    .map_err(Error::from)
                    .with_context(|| format!("configuration {g}"))?;
                report.push_eval(&g, &r);
            }
        }
    }
    emit(cli.out.as_deref(), &report)?;
    Ok(check_floor(&report, a.check))
}

fn cv_cmd(cli: &Cli, a: &CvArgs) -> Result<Outcome> {
    let kinds = kinds(&a.model)?;
    let x = a.pipeline.matrix()?;
    let mut report = Report::default();
    for (g, m) in groups(&x, a.config_id.as_deref())? {
        let k_folds = match a.folds {
            Some(k) => k,
            None => evaluate::default_folds_for_overhang(g.parse().unwrap_or(f64::NAN)),
        };
        for k in &kinds {
            for rfe in a.model.rfe.settings() {
                log(format!("cv {g} {k} rfe={rfe} folds={k_folds}"));
                let r = evaluate::kfold_cv(&m, k, rfe, k_folds, cli.seed)
                    .map_err(Error::from)
                    .with_context(|| format!("configuration {g}"))?;
                report.push_eval(&g, &r);
            }
        }
    }
    emit(cli.out.as_deref(), &report)?;
    Ok(check_floor(&report, a.check))
}

fn transfer_cmd(cli: &Cli, a: &TransferArgs) -> Result<Outcome> {
    let kinds = kinds(&a.model)?;
    let x = a.pipeline.matrix()?;
    let source = group_rows(&x, &a.source_config)?;
    let target = group_rows(&x, &a.target_config)?;
    let mut report = Report::default();
    for k in &kinds {
        for rfe in a.model.rfe.settings() {
            log(format!("transfer {} -> {} {k} rfe={rfe}", a.source_config, a.target_config));
            let t = evaluate::transfer_eval(&source, &target, k, rfe, cli.seed).map_err(Error::from)?;
            report.push_transfer(&t);
        }
    }
    emit(cli.out.as_deref(), &report)?;
    Ok(check_floor(&report, a.check))
}

fn rank_cmd(cli: &Cli, a: &RankArgs) -> Result<Outcome> {
    let kind: ClassifierKind = a.classifier.parse().map_err(|e| anyhow!("learn: {e}"))?;
    let x = a.pipeline.matrix()?;
    let x = match &a.config_id {
        Some(g) => group_rows(&x, g)?,
        None => x,
    };
    let r = evaluate::repeated_split_eval(&x, &kind, true, a.reps, a.test_frac, cli.seed).map_err(Error::from)?;
    let counts = evaluate::ranking_frequency(&r, x.n_features()).map_err(Error::from)?;
    let ranking = chatterkit::rank_features(&x, &kind, cli.seed).map_err(Error::from)?;
    let mut body = String::from("feature_name,rank,selection_count\n");
    for (pos, &j) in ranking.order.iter().enumerate() {
        body.push_str(&format!("{},{},{}\n", x.feature_names[j], pos + 1, counts[j]));
    }
    emit_text(cli.out.as_deref(), &body)?;
    Ok(Outcome::Done)
}

fn dump_cmd(cli: &Cli, a: &DumpArgs) -> Result<Outcome> {
    let cfg = a.pipeline.feature_config()?;
    let ds = a.pipeline.dataset()?;
    let rec = ds
        .records
        .iter()
        .find(|r| r.config.config_id == a.record)
        .ok_or_else(|| anyhow!("dataset: no record with id {:?}", a.record))?;
    let seq = match a.kind {
        KindArg::Fft => transform::amplitude_spectrum(rec),
        KindArg::Psd => transform::power_spectral_density(rec, &cfg.welch),
        KindArg::Acf => {
            let lag = cfg.max_lag.unwrap_or_else(|| transform::default_max_lag(rec.len()));
            transform::autocorrelation(rec, lag)
        }
    }
    .map_err(Error::from)?;
    emit_text(cli.out.as_deref(), &seq.to_csv())?;
    Ok(Outcome::Done)
}
