use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use weylcheck::curvature::CurvatureBundle;
use weylcheck::models::{catalog, ChartPoint, MetricModel, ParamValue, Parameters};
use weylcheck::runner::{self, ModelSpec, OutputFormat, RunConfig, EXIT_USAGE};
use weylcheck::{build_bundle, Error, TensorValue};

#[derive(Parser)]
#[command(name = "weylcheck", version, about = "Numerical verification of Weyl-tensor identities on twisted space-times")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the identity suite on sampled points of each model.
    Verify {
        /// TOML run configuration.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Points per model.
        #[arg(long)]
        points: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// text or structured (JSON).
        #[arg(long)]
        format: Option<String>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Restrict to these models, as NAME or NAME:N. Repeatable.
        #[arg(long = "model")]
        models: Vec<String>,
        /// Override a tolerance, as ID=VALUE. Repeatable.
        #[arg(long = "tolerance")]
        tolerances: Vec<String>,
    },
    /// Print curvature quantities of one model at one chart point.
    TensorDump {
        #[arg(long)]
        model: String,
        #[arg(long)]
        n: Option<usize>,
        /// Model parameter, as KEY=VALUE. Repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        /// Comma-separated coordinates t,x1,...; defaults to the first sampled point.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        /// Fields to print; all when omitted. Repeatable.
        #[arg(long = "field")]
        fields: Vec<String>,
        #[arg(long, default_value = "text")]
        format: String,
    },
    /// List the built-in metric models.
    ModelsList {
        #[arg(long, default_value = "text")]
        format: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify {
            config,
            points,
            seed,
            format,
            output,
            models,
            tolerances,
        } => verify(config, points, seed, format, output, models, tolerances),
        Command::TensorDump {
            model,
            n,
            params,
            point,
            fields,
            format,
        } => tensor_dump(&model, n, &params, point.as_deref(), &fields, &format),
        Command::ModelsList { format } => models_list(&format),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}

fn parse_model_arg(arg: &str) -> Result<ModelSpec, Error> {
    let (name, n) = match arg.split_once(':') {
        Some((name, n)) => {
            let n = n
                .parse()
                .map_err(|_| Error::Config(format!("bad dimension in --model {arg}")))?;
            (name, Some(n))
        }
        None => (arg, None),
    };
    Ok(ModelSpec {
        name: name.to_string(),
        n,
        parameters: Parameters::new(),
        components: None,
        expected_class: None,
    })
}

fn parse_key_value(arg: &str, flag: &str) -> Result<(String, String), Error> {
    arg.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| Error::Config(format!("{flag} expects KEY=VALUE, got '{arg}'")))
}

fn verify(
    config: Option<PathBuf>,
    points: Option<usize>,
    seed: Option<u64>,
    format: Option<String>,
    output: Option<PathBuf>,
    models: Vec<String>,
    tolerances: Vec<String>,
) -> Result<i32, Error> {
    let mut cfg = match &config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(p) = points {
        cfg.points = p;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(f) = format {
        cfg.output_format = OutputFormat::parse(&f)?;
    }
    if output.is_some() {
        cfg.output_path = output;
    }
    if !models.is_empty() {
        let wanted = models.iter().map(|m| parse_model_arg(m)).collect::<Result<Vec<_>, _>>()?;
        cfg.models = if cfg.models.is_empty() {
            select_defaults(&wanted)?
        } else {
            cfg.models
                .into_iter()
                .filter(|m| wanted.iter().any(|w| w.name == m.name && w.n.is_none_or(|n| m.n == Some(n))))
                .collect()
        };
        if cfg.models.is_empty() {
            return Err(Error::Config("no configured model matches --model".into()));
        }
    }
    for t in &tolerances {
        let (id, value) = parse_key_value(t, "--tolerance")?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad tolerance value in '{t}'")))?;
        cfg.tolerances.insert(id, value);
    }

    let report = runner::run(&cfg)?;
    let rendered = report.render(cfg.output_format);
    match &cfg.output_path {
        Some(path) => {
            std::fs::write(path, rendered).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
            let unexpected = report.unexpected().len();
            println!(
                "wrote {} reports to {} ({unexpected} unexpected)",
                report.reports.len(),
                path.display()
            );
        }
        None => print!("{rendered}"),
    }
    Ok(report.exit_code())
}

/// `--model NAME` picks every default instance of NAME; a model that is not
/// among the defaults is built with its own defaults.
fn select_defaults(wanted: &[ModelSpec]) -> Result<Vec<ModelSpec>, Error> {
    let defaults = runner::default_models();
    let mut out = Vec::new();
    for w in wanted {
        let matches: Vec<ModelSpec> = defaults
            .iter()
            .filter(|d| d.name == w.name && w.n.is_none_or(|n| d.n == Some(n)))
            .cloned()
            .collect();
        if matches.is_empty() {
            w.instantiate()?;
            out.push(w.clone());
        } else {
            out.extend(matches);
        }
    }
    Ok(out)
}

fn tensor_dump(
    model: &str,
    n: Option<usize>,
    params: &[String],
    point: Option<&str>,
    fields: &[String],
    format: &str,
) -> Result<i32, Error> {
    let mut parameters = Parameters::new();
    for p in params {
        let (k, v) = parse_key_value(p, "--param")?;
        parameters.insert(k, ParamValue::parse(&v));
    }
    let model = MetricModel::builtin(model, n, &parameters)?;
    let point = match point {
        Some(text) => {
            let coords = text
                .split(',')
                .map(|c| c.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| Error::Config(format!("bad --point '{text}'")))?;
            if coords.len() != model.n() {
                return Err(Error::DimensionMismatch { expected: model.n(), found: coords.len() });
            }
            ChartPoint::new(coords)
        }
        None => model.sample_points(1, runner::DEFAULT_SEED)?.remove(0),
    };
    let names: Vec<String> = if fields.is_empty() {
        CurvatureBundle::FIELDS.iter().map(|s| s.to_string()).collect()
    } else {
        fields.to_vec()
    };
    for name in &names {
        if !CurvatureBundle::FIELDS.contains(&name.as_str()) {
            return Err(Error::Config(format!(
                "unknown field '{name}' (known: {})",
                CurvatureBundle::FIELDS.join(", ")
            )));
        }
    }
    let bundle = build_bundle(&model, &point)?;
    let selected: Vec<(String, TensorValue)> = names
        .iter()
        .map(|name| (name.clone(), bundle.field(name).expect("field name was validated")))
        .collect();

    match OutputFormat::parse(format)? {
        OutputFormat::Structured => {
            let mut map = Map::new();
            for (name, t) in &selected {
                map.insert(name.clone(), serde_json::to_value(t).expect("tensor serializes"));
            }
            let doc = json!({
                "model": model.name(),
                "label": model.label(),
                "n": model.n(),
                "point": point.coords,
                "fields": Value::Object(map),
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json serializes"));
        }
        OutputFormat::Text => {
            println!("{} at ({})", model.label(), join(&point.coords));
            for (name, t) in &selected {
                print_tensor(name, t);
            }
        }
    }
    Ok(0)
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(", ")
}

fn print_tensor(name: &str, t: &TensorValue) {
    if let Some(v) = t.as_scalar() {
        println!("{name} = {v:.15e}");
        return;
    }
    let variance: Vec<&str> = t
        .variance()
        .iter()
        .map(|v| match v {
            weylcheck::Variance::Up => "up",
            weylcheck::Variance::Down => "down",
        })
        .collect();
    println!("{name} [{}]", variance.join(","));
    let n = t.n();
    let rank = t.rank();
    for (flat, value) in t.components().iter().enumerate() {
        if *value == 0.0 {
            continue;
        }
        let mut idx = vec![0; rank];
        let mut rest = flat;
        for slot in (0..rank).rev() {
            idx[slot] = rest % n;
            rest /= n;
        }
        let idx: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
        println!("  {name}[{}] = {value:.15e}", idx.join(","));
    }
}

fn models_list(format: &str) -> Result<i32, Error> {
    let entries = catalog();
    match OutputFormat::parse(format)? {
        OutputFormat::Structured => {
            println!("{}", serde_json::to_string_pretty(&entries).expect("catalog serializes"));
        }
        OutputFormat::Text => {
            for e in &entries {
                println!("{:<24} {:<12} n={:<6} {}", e.name, e.class.as_str(), e.dims, e.description);
                if !e.parameters.is_empty() {
                    println!("{:<24} parameters: {}", "", e.parameters);
                }
            }
        }
    }
    Ok(0)
}
