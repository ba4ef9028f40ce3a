use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use imaze_core::analytics::{
    compare_providers, fit_rt_model, lmaze_gmaze_contrast, parse_scalar_grid, read_residuals, read_slowdown_reports,
    read_sweep, residual_analysis, scalar_sweep, slowdown_reports, write_comparisons, write_residual_summary,
    write_residuals, write_slowdown_plot_data, write_slowdown_reports, write_sweep, FitOptions, LinearFit,
    RegionScope, SlowdownOptions, TrialFilter,
};
use imaze_core::maze::{
    generate_materials, hash_bytes, CharModel, CharModelConfig, Generators, Lexicon, MaterialsBundle, NonceConfig,
};
use imaze_core::scoring::{
    accuracy_score, consistency_score, correlate_reports, read_score_report, write_accuracy_plot_data,
    write_score_report, RtOptions,
};
use imaze_core::simulate::{simulate_rt_log, SimParams};
use imaze_core::store::ResultStore;
use imaze_core::suite::{load_suite, validate_suite, TestSuite};
use imaze_core::surprisal::{
    ingest_token_surprisals, read_token_records, score_suites_ngram, train_ngram, Aggregation, FrequencyTable,
    NGramConfig, NGramModel, ProviderConfig, SurprisalTable,
};
use imaze_core::trials::{read_rt_log, write_rt_rows, DistractorKind, RTTrial};
use imaze_core::{Error, Result};

use crate::config::RunConfig;
use crate::manifest::{verify, FileDigest, Manifest, Recorder};
use crate::{
    run, AnalyzeCmd, Cli, Command, ExportCmd, KindArg, MazeCmd, ScoreCmd, ScopeArg, ServeArgs, SimulateCmd,
    SuiteCmd, SuitesArg, SurprisalCmd, TrialInputs,
};

struct Ctx {
    rec: Recorder,
    config: RunConfig,
    seed: Option<u64>,
    out: PathBuf,
}

fn tsv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut s = header.join("\t");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join("\t"));
        s.push('\n');
    }
    s
}

fn stat_rows(rows: &[(&str, String)]) -> String {
    tsv(&["statistic", "value"], rows.iter().map(|(k, v)| vec![k.to_string(), v.clone()]))
}

/// `explicit`, else the file name with `prefix` and the extension removed.
fn provider_name(explicit: Option<&str>, path: &Path, prefix: &str) -> String {
    if let Some(p) = explicit {
        return p.to_string();
    }
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    stem.strip_prefix(prefix).unwrap_or(&stem).to_string()
}

fn suite_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    if files.is_empty() {
        return Err(Error::InvalidArgument("no suite files given (--suites or data.suites)".into()));
    }
    Ok(files)
}

fn in_file(path: &Path, e: Error) -> Error {
    let p = path.display();
    match e {
        Error::InvalidSuite(m) => Error::InvalidSuite(format!("{p}: {m}")),
        Error::UnknownReference(m) => Error::UnknownReference(format!("{p}: {m}")),
        Error::Format(m) => Error::Format(format!("{p}: {m}")),
        Error::Schema(m) => Error::Schema(format!("{p}: {m}")),
        other => other,
    }
}

impl Ctx {
    fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidArgument("this command is stochastic: pass --seed or set seed in the config".into()))
    }

    fn suite_paths(&self, arg: &SuitesArg) -> Result<Vec<PathBuf>> {
        let given = if arg.suites.is_empty() {
            &self.config.data.suites
        } else {
            &arg.suites
        };
        suite_files(given)
    }

    fn suites(&mut self, arg: &SuitesArg) -> Result<Vec<TestSuite>> {
        let mut tags = BTreeSet::new();
        let mut out = Vec::new();
        for path in self.suite_paths(arg)? {
            let text = self.rec.read_string(&path)?;
            let suite = load_suite(&text).map_err(|e| in_file(&path, e))?;
            if !tags.insert(suite.tag.clone()) {
                return Err(Error::InvalidSuite(format!("duplicate suite tag {:?} in {}", suite.tag, path.display())));
            }
            out.push(suite);
        }
        Ok(out)
    }

    fn configured(&self, given: &Option<PathBuf>, fallback: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
        given
            .clone()
            .or_else(|| fallback.clone())
            .ok_or_else(|| Error::InvalidArgument(format!("missing --{flag} (no default in the config)")))
    }

    fn freq(&mut self, given: &Option<PathBuf>, required: bool) -> Result<FrequencyTable> {
        match given.clone().or_else(|| self.config.data.frequency.clone()) {
            Some(p) => FrequencyTable::read_tsv(self.rec.read(&p)?.as_slice()).map_err(|e| in_file(&p, e)),
            None if required => Err(Error::InvalidArgument("missing --freq (no default in the config)".into())),
            None => Ok(FrequencyTable::default()),
        }
    }

    fn trials(&mut self, rt_log: &Option<PathBuf>, freq: &FrequencyTable) -> Result<Vec<RTTrial>> {
        let path = self.configured(rt_log, &self.config.data.rt_log.clone(), "rt-log")?;
        read_rt_log(self.rec.read(&path)?.as_slice(), freq).map_err(|e| in_file(&path, e))
    }

    fn table(&mut self, path: &Path, provider: &str, suites: &[TestSuite]) -> Result<SurprisalTable> {
        SurprisalTable::read_tsv(provider, self.rec.read(path)?.as_slice(), suites).map_err(|e| in_file(path, e))
    }

    fn aggregation(&self, given: &Option<String>) -> Result<Aggregation> {
        given
            .as_deref()
            .or(self.config.analysis.aggregation.as_deref())
            .map_or(Ok(Aggregation::Sum), str::parse)
    }

    fn max_rt(&self, given: Option<f64>) -> Option<f64> {
        given.or(self.config.analysis.max_rt)
    }

    fn output(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.out.join(name);
        self.rec.write(&path, bytes)?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn finish(&self, name: &str) -> Result<()> {
        self.rec.finish(&self.out, name).map(|_| ())
    }
}

pub fn execute(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Command::Rerun { manifest } = &cli.command {
        return rerun(manifest);
    }
    let (config, digest) = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            let digest = FileDigest {
                path: p.display().to_string(),
                sha256: hash_bytes(text.as_bytes()),
            };
            (RunConfig::load(p, &text)?, Some(digest))
        }
        None => (RunConfig::default(), None),
    };
    let seed = cli.seed.or(config.seed);
    let out = cli.out.clone().or_else(|| config.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let mut ctx = Ctx {
        rec: Recorder::new(argv, seed, digest),
        config,
        seed,
        out,
    };
    match cli.command {
        Command::Suite(SuiteCmd::Validate { suites }) => suite_validate(&mut ctx, &suites),
        Command::Surprisal(c) => surprisal(&mut ctx, c),
        Command::Score(c) => score(&mut ctx, c),
        Command::Analyze(c) => analyze(&mut ctx, c),
        Command::Maze(c) => maze(&mut ctx, c),
        Command::Simulate(c) => simulate(&mut ctx, c),
        Command::Serve(args) => serve(&mut ctx, args),
        Command::Export(c) => export(&mut ctx, c),
        Command::Rerun { .. } => unreachable!("handled above"),
    }
}

fn suite_validate(ctx: &mut Ctx, arg: &SuitesArg) -> Result<()> {
    let mut rows = Vec::new();
    let files = ctx.suite_paths(arg)?;
    for path in &files {
        let text = ctx.rec.read_string(path)?;
        let file = path.display().to_string();
        match TestSuite::from_json(&text) {
            Ok(suite) => {
                let violations = validate_suite(&suite);
                println!("{file}\t{}\t{} violations", suite.tag, violations.len());
                for v in violations {
                    rows.push(vec![
                        file.clone(),
                        suite.tag.clone(),
                        v.item.map(|i| i.to_string()).unwrap_or_default(),
                        v.condition.clone().unwrap_or_default(),
                        v.rule.as_str().to_string(),
                        v.detail.replace(['\t', '\n'], " "),
                    ]);
                }
            }
            Err(e) => {
                println!("{file}\t-\tunparseable");
                rows.push(vec![file, String::new(), String::new(), String::new(), "parse".into(), e.to_string()]);
            }
        }
    }
    let n = rows.len();
    ctx.output("validation.tsv", tsv(&["file", "suite_tag", "item", "condition", "rule", "detail"], rows).as_bytes())?;
    ctx.finish("suite-validate")?;
    if n > 0 {
        return Err(Error::InvalidSuite(format!("{n} violations across {} files (see validation.tsv)", files.len())));
    }
    Ok(())
}

fn surprisal(ctx: &mut Ctx, cmd: SurprisalCmd) -> Result<()> {
    match cmd {
        SurprisalCmd::Ingest {
            suites,
            tokens,
            provider,
            join_marker,
            skip_tokens,
        } => {
            let suites = ctx.suites(&suites)?;
            let records = read_token_records(ctx.rec.read(&tokens)?.as_slice()).map_err(|e| in_file(&tokens, e))?;
            let config = ProviderConfig {
                name: provider.clone(),
                join_marker,
                skip_tokens,
            };
            let table = ingest_token_surprisals(&records, &suites, &config)?;
            write_table(ctx, &table)?;
            ctx.finish(&format!("surprisal-ingest.{provider}"))
        }
        SurprisalCmd::NgramTrain {
            corpus,
            order,
            discount,
            no_normalize,
        } => {
            let path = ctx.configured(&corpus, &ctx.config.data.corpus.clone(), "corpus")?;
            let text = ctx.rec.read_string(&path)?;
            let sentences: Vec<Vec<&str>> = text
                .lines()
                .map(|l| l.split_whitespace().collect::<Vec<_>>())
                .filter(|s| !s.is_empty())
                .collect();
            let config = NGramConfig {
                order,
                discount,
                normalize: !no_normalize,
            };
            let model = train_ngram(&sentences, config)?;
            let freq = FrequencyTable::from_corpus(&sentences)?;
            ctx.output("ngram.json", model.to_json().as_bytes())?;
            let mut buf = Vec::new();
            freq.write_tsv(&mut buf)?;
            ctx.output("frequency.tsv", &buf)?;
            ctx.finish("surprisal-ngram-train")
        }
        SurprisalCmd::Score { suites, model, provider } => {
            let suites = ctx.suites(&suites)?;
            let model = NGramModel::from_json(&ctx.rec.read_string(&model)?).map_err(|e| in_file(&model, e))?;
            let table = score_suites_ngram(&model, &suites, &provider);
            write_table(ctx, &table)?;
            ctx.finish(&format!("surprisal-score.{provider}"))
        }
    }
}

fn write_table(ctx: &mut Ctx, table: &SurprisalTable) -> Result<()> {
    let mut buf = Vec::new();
    table.write_tsv(&mut buf)?;
    ctx.output(&format!("surprisal.{}.tsv", table.provider), &buf)
}

fn score(ctx: &mut Ctx, cmd: ScoreCmd) -> Result<()> {
    match cmd {
        ScoreCmd::Accuracy {
            suites,
            surprisal,
            provider,
            aggregation,
        } => {
            let suites = ctx.suites(&suites)?;
            let provider = provider_name(provider.as_deref(), &surprisal, "surprisal.");
            let aggregation = ctx.aggregation(&aggregation)?;
            let table = ctx.table(&surprisal, &provider, &suites)?;
            let scores = suites
                .iter()
                .map(|s| accuracy_score(s, &table, aggregation))
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_score_report(&scores, &mut buf)?;
            ctx.output(&format!("accuracy.{provider}.tsv"), &buf)?;
            ctx.finish(&format!("score-accuracy.{provider}"))
        }
        ScoreCmd::Consistency {
            suites,
            rt_log,
            aggregation,
            max_rt,
        } => {
            let suites = ctx.suites(&suites)?;
            let trials = ctx.trials(&rt_log, &FrequencyTable::default())?;
            let options = RtOptions {
                aggregation: ctx.aggregation(&aggregation)?,
                max_rt: ctx.max_rt(max_rt),
            };
            let scores = suites
                .iter()
                .map(|s| consistency_score(s, &trials, options))
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_score_report(&scores, &mut buf)?;
            ctx.output("consistency.tsv", &buf)?;
            ctx.finish("score-consistency")
        }
        ScoreCmd::Correlate { model, human } => {
            let provider = provider_name(None, &model, "accuracy.");
            let m = read_score_report(ctx.rec.read(&model)?.as_slice()).map_err(|e| in_file(&model, e))?;
            let h = read_score_report(ctx.rec.read(&human)?.as_slice()).map_err(|e| in_file(&human, e))?;
            let (corr, pairs) = correlate_reports(&m, &h)?;
            let rows = pairs.into_iter().map(|(tag, a, b)| vec![tag, a.to_string(), b.to_string()]);
            ctx.output(&format!("correlation.{provider}.tsv"), tsv(&["suite_tag", "model", "human"], rows).as_bytes())?;
            let summary = stat_rows(&[("r", corr.r.to_string()), ("p", corr.p.to_string()), ("n", corr.n.to_string())]);
            ctx.output(&format!("correlation_summary.{provider}.tsv"), summary.as_bytes())?;
            ctx.finish(&format!("score-correlate.{provider}"))
        }
    }
}

fn read_fit(ctx: &mut Ctx, path: &Path) -> Result<LinearFit> {
    LinearFit::from_json(&ctx.rec.read_string(path)?).map_err(|e| in_file(path, e))
}

fn analyze(ctx: &mut Ctx, cmd: AnalyzeCmd) -> Result<()> {
    match cmd {
        AnalyzeCmd::Fit {
            inputs,
            surprisal,
            provider,
            kind,
            scope,
            participant_offsets,
            item_offsets,
        } => {
            let TrialInputs {
                suites,
                rt_log,
                freq,
                max_rt,
            } = inputs;
            let suites = ctx.suites(&suites)?;
            let freq = ctx.freq(&freq, true)?;
            let trials = ctx.trials(&rt_log, &freq)?;
            let provider = provider_name(provider.as_deref(), &surprisal, "surprisal.");
            let table = ctx.table(&surprisal, &provider, &suites)?;
            let (scope, scope_name) = match scope {
                ScopeArg::All => (RegionScope::All, "all"),
                ScopeArg::Critical => (RegionScope::Critical, "critical"),
                ScopeArg::NonCritical => (RegionScope::NonCritical, "non_critical"),
            };
            let filter = TrialFilter {
                kind: match kind {
                    KindArg::L => Some(DistractorKind::L),
                    KindArg::G => Some(DistractorKind::G),
                    KindArg::Any => None,
                },
                scope,
                max_rt: ctx.max_rt(max_rt),
            };
            let options = FitOptions {
                participant_offsets,
                item_offsets,
            };
            let fit = fit_rt_model(&trials, filter, &table, options)?;
            println!("{provider}\tms_per_bit\t{}\tp\t{:e}\tn\t{}", fit.ms_per_bit(), fit.ms_per_bit_p(), fit.n);
            ctx.output(&format!("fit.{provider}.{scope_name}.json"), fit.to_json().as_bytes())?;
            ctx.finish(&format!("analyze-fit.{provider}.{scope_name}"))
        }
        AnalyzeCmd::Slowdown {
            inputs,
            fit,
            surprisal,
            n_boot,
            level,
        } => {
            if fit.len() != surprisal.len() || fit.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "--fit and --surprisal must pair up ({} fits, {} tables)",
                    fit.len(),
                    surprisal.len()
                )));
            }
            let seed = ctx.seed()?;
            let suites = ctx.suites(&inputs.suites)?;
            let freq = ctx.freq(&inputs.freq, false)?;
            let trials = ctx.trials(&inputs.rt_log, &freq)?;
            let mut fits = Vec::new();
            let mut tables = Vec::new();
            for (f, s) in fit.iter().zip(&surprisal) {
                let lf = read_fit(ctx, f)?;
                tables.push(ctx.table(s, &lf.provider, &suites)?);
                fits.push(lf);
            }
            let pairs: Vec<(&LinearFit, &SurprisalTable)> = fits.iter().zip(&tables).collect();
            let defaults = SlowdownOptions::seeded(seed);
            let options = SlowdownOptions {
                n_boot: n_boot.or(ctx.config.analysis.n_boot).unwrap_or(defaults.n_boot),
                level: level.or(ctx.config.analysis.level).unwrap_or(defaults.level),
                rt: RtOptions {
                    aggregation: ctx.aggregation(&None)?,
                    max_rt: ctx.max_rt(inputs.max_rt),
                },
                ..defaults
            };
            let reports = slowdown_reports(&suites, &trials, &pairs, options)?;
            let mut buf = Vec::new();
            write_slowdown_reports(&reports, &mut buf)?;
            ctx.output("slowdown.tsv", &buf)?;
            ctx.finish("analyze-slowdown")
        }
        AnalyzeCmd::Residuals { inputs, fit, surprisal } => {
            let suites = ctx.suites(&inputs.suites)?;
            let freq = ctx.freq(&inputs.freq, true)?;
            let trials = ctx.trials(&inputs.rt_log, &freq)?;
            let fit = read_fit(ctx, &fit)?;
            let table = ctx.table(&surprisal, &fit.provider, &suites)?;
            let (records, summary) = residual_analysis(&fit, &trials, &table, &suites)?;
            let provider = fit.provider.clone();
            let mut buf = Vec::new();
            write_residuals(&records, &mut buf)?;
            ctx.output(&format!("residuals.{provider}.tsv"), &buf)?;
            let mut buf = Vec::new();
            write_residual_summary(&summary, &mut buf)?;
            ctx.output(&format!("residual_summary.{provider}.tsv"), &buf)?;
            ctx.finish(&format!("analyze-residuals.{provider}"))
        }
        AnalyzeCmd::Sweep { slowdown, scalars } => {
            let reports = read_slowdown_reports(ctx.rec.read(&slowdown)?.as_slice()).map_err(|e| in_file(&slowdown, e))?;
            let curves = scalar_sweep(&reports, &parse_scalar_grid(&scalars)?)?;
            let mut buf = Vec::new();
            write_sweep(&curves, &mut buf)?;
            ctx.output("sweep.tsv", &buf)?;
            ctx.finish("analyze-sweep")
        }
        AnalyzeCmd::Compare { residuals } => {
            let mut sets = Vec::new();
            for p in &residuals {
                let records = read_residuals(ctx.rec.read(p)?.as_slice()).map_err(|e| in_file(p, e))?;
                sets.push((provider_name(None, p, "residuals."), records));
            }
            let rows = compare_providers(&sets)?;
            let mut buf = Vec::new();
            write_comparisons(&rows, &mut buf)?;
            ctx.output("comparisons.tsv", &buf)?;
            ctx.finish("analyze-compare")
        }
        AnalyzeCmd::LmazeContrast { rt_log, max_rt } => {
            let trials = ctx.trials(&rt_log, &FrequencyTable::default())?;
            let w = lmaze_gmaze_contrast(&trials, ctx.max_rt(max_rt))?;
            let text = stat_rows(&[
                ("mean_lmaze_ms", w.mean_a.to_string()),
                ("mean_gmaze_ms", w.mean_b.to_string()),
                ("difference_ms", w.difference().to_string()),
                ("t", w.t.to_string()),
                ("df", w.df.to_string()),
                ("p", w.p.to_string()),
            ]);
            ctx.output("lmaze_contrast.tsv", text.as_bytes())?;
            ctx.finish("analyze-lmaze-contrast")
        }
    }
}

fn maze(ctx: &mut Ctx, cmd: MazeCmd) -> Result<()> {
    let MazeCmd::Generate {
        suites,
        model,
        freq,
        lexicon,
        rate,
        char_order,
        char_smoothing,
        ceiling_bits,
        max_tries,
    } = cmd;
    let seed = ctx.seed()?;
    let suites = ctx.suites(&suites)?;
    let model_bytes = ctx.rec.read(&model)?;
    let model_sha = hash_bytes(&model_bytes);
    let lm = NGramModel::from_json(std::str::from_utf8(&model_bytes).map_err(|_| Error::Format("model is not UTF-8".into()))?)
        .map_err(|e| in_file(&model, e))?;
    let freq = ctx.freq(&freq, true)?;
    let mut lex = Lexicon::from_frequency(&freq);
    if let Some(p) = &lexicon {
        let text = ctx.rec.read_string(p)?;
        lex.extend_members(text.lines().map(str::trim).filter(|w| !w.is_empty()));
    }
    let chars = CharModel::train(
        freq.iter().map(|(w, _)| w),
        CharModelConfig {
            order: char_order,
            smoothing: char_smoothing,
        },
    )?;
    let gens = Generators {
        scorer: &lm,
        lexicon: &lex,
        freq: &freq,
        chars: &chars,
        nonce: NonceConfig {
            ceiling_bits,
            max_tries,
        },
    };
    let lm_config = serde_json::json!({ "kind": "ngram", "config": lm.config(), "sha256": model_sha });
    let bundle = generate_materials(&suites, &gens, rate, seed, lm_config)?;
    let json = bundle.to_json();
    let hash = hash_bytes(json.as_bytes());
    ctx.output("materials.json", json.as_bytes())?;
    ctx.output("materials.sha256", format!("{hash}\n").as_bytes())?;
    println!("materials {hash}");
    ctx.finish("maze-generate")
}

fn simulate(ctx: &mut Ctx, cmd: SimulateCmd) -> Result<()> {
    let SimulateCmd::RtLog {
        suites,
        surprisal,
        freq,
        materials,
        participants,
        ms_per_bit,
        effect_ms,
        noise_sd,
        error_rate,
    } = cmd;
    let seed = ctx.seed()?;
    let suites = ctx.suites(&suites)?;
    let provider = provider_name(None, &surprisal, "surprisal.");
    let table = ctx.table(&surprisal, &provider, &suites)?;
    let freq = ctx.freq(&freq, false)?;
    let bundle = match materials.or_else(|| ctx.config.data.materials.clone()) {
        Some(p) => Some(MaterialsBundle::from_json(&ctx.rec.read_string(&p)?).map_err(|e| in_file(&p, e))?),
        None => None,
    };
    let d = SimParams::default();
    let params = SimParams {
        participants: participants.unwrap_or(d.participants),
        ms_per_bit: ms_per_bit.unwrap_or(d.ms_per_bit),
        effect_ms: effect_ms.unwrap_or(d.effect_ms),
        noise_sd: noise_sd.unwrap_or(d.noise_sd),
        error_rate: error_rate.unwrap_or(d.error_rate),
        ..d
    };
    let rows = simulate_rt_log(&suites, &table, &freq, bundle.as_ref(), params, seed)?;
    let mut buf = Vec::new();
    write_rt_rows(&rows, &mut buf, true)?;
    ctx.output("rt_log.csv", &buf)?;
    ctx.finish("simulate-rt-log")
}

fn serve(ctx: &mut Ctx, args: ServeArgs) -> Result<()> {
    let store = ResultStore::open(&args.data_dir)?;
    for p in &args.materials {
        let bundle = MaterialsBundle::from_json(&ctx.rec.read_string(p)?).map_err(|e| in_file(p, e))?;
        println!("registered materials {}", store.put_materials(&bundle)?);
    }
    ctx.rec.finish(&args.data_dir, "serve")?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Error::io("<tokio runtime>", e))?;
    runtime.block_on(crate::server::serve(Arc::new(store), args.runner, &args.addr))
}

fn export(ctx: &mut Ctx, cmd: ExportCmd) -> Result<()> {
    let ExportCmd::Plots {
        accuracy,
        consistency,
        slowdown,
        sweep,
    } = cmd;
    if accuracy.is_empty() && consistency.is_none() && slowdown.is_none() && sweep.is_none() {
        return Err(Error::InvalidArgument("export plots needs at least one input report".into()));
    }
    let mut groups = Vec::new();
    for p in &accuracy {
        let rows = read_score_report(ctx.rec.read(p)?.as_slice()).map_err(|e| in_file(p, e))?;
        groups.push((provider_name(None, p, "accuracy."), rows));
    }
    if let Some(p) = &consistency {
        let rows = read_score_report(ctx.rec.read(p)?.as_slice()).map_err(|e| in_file(p, e))?;
        groups.push(("human".to_string(), rows));
    }
    if !groups.is_empty() {
        let mut buf = Vec::new();
        write_accuracy_plot_data(&groups, &mut buf)?;
        ctx.output("accuracy_plot.tsv", &buf)?;
    }
    if let Some(p) = &slowdown {
        let reports = read_slowdown_reports(ctx.rec.read(p)?.as_slice()).map_err(|e| in_file(p, e))?;
        let mut buf = Vec::new();
        write_slowdown_plot_data(&reports, &mut buf)?;
        ctx.output("slowdown_plot.tsv", &buf)?;
    }
    if let Some(p) = &sweep {
        let curves = read_sweep(ctx.rec.read(p)?.as_slice()).map_err(|e| in_file(p, e))?;
        let mut buf = Vec::new();
        write_sweep(&curves, &mut buf)?;
        ctx.output("sweep_plot.tsv", &buf)?;
    }
    ctx.finish("export-plots")
}

fn rerun(path: &Path) -> Result<()> {
    let m = Manifest::read(path)?;
    match m.command.first().map(String::as_str) {
        None => return Err(Error::Format(format!("{}: empty command", path.display()))),
        Some("rerun") => return Err(Error::InvalidArgument("a manifest cannot record a rerun".into())),
        Some("serve") => return Err(Error::InvalidArgument("serve manifests cannot be rerun".into())),
        _ => {}
    }
    if let Some(c) = &m.config {
        verify(std::slice::from_ref(c), "config")?;
    }
    verify(&m.inputs, "inputs")?;
    let argv: Vec<String> = std::iter::once("imaze".to_string()).chain(m.command.iter().cloned()).collect();
    run(&argv)?;
    verify(&m.outputs, "regenerated outputs")?;
    println!("rerun reproduced {} outputs", m.outputs.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn provider_names_come_from_file_names() {
        assert_eq!(provider_name(None, Path::new("out/surprisal.gpt2.tsv"), "surprisal."), "gpt2");
        assert_eq!(provider_name(None, Path::new("lm.tsv"), "surprisal."), "lm");
        assert_eq!(provider_name(Some("x"), Path::new("lm.tsv"), "surprisal."), "x");
    }

    #[test]
    fn tsv_layout() {
        let t = tsv(&["a", "b"], [vec!["1".into(), "2".into()]]);
        assert_eq!(t, "a\tb\n1\t2\n");
    }
}
