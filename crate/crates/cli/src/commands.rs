use std::fs;
use std::path::Path;

use fraclap_dyadic::energy::{energy_haar, energy_quadrature, EnergyReport};
use fraclap_dyadic::export::{decomposition_csv, function_csv, parse_function_csv, plot_csv, tree_record};
use fraclap_dyadic::verify::{self, SuiteReport};
use fraclap_dyadic::{
    Address, CellFunction, DyadicTree, Error, GalerkinProblem, HaarSystem, HalfLineModel, KernelParams,
    SierpinskiModel, SpaceModel,
};
use serde_json::{json, Value};

use crate::config::{Command, FunctionSpec, Mode, ModelName, RunConfig, Suite, Via};
use crate::error::CliError;

/// Files to write and a summary for stdout.
struct Outcome {
    files: Vec<(String, String)>,
    summary: String,
    pass: bool,
}

/// Runs the command and writes its files. Returns the process exit code.
pub fn run(cfg: &RunConfig) -> Result<u8, CliError> {
    fs::create_dir_all(&cfg.output).map_err(|source| CliError::Io {
        path: cfg.output.clone(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cfg.workers)))?;
    let outcome = pool.install(|| match cfg.model {
        ModelName::Sierpinski => dispatch(cfg, SierpinskiModel::<f64>::new(cfg.m0)),
        ModelName::Halfline => dispatch(cfg, HalfLineModel::<f64>::new(cfg.m0)),
    })?;
    for (name, body) in &outcome.files {
        write(&cfg.output.join(name), body)?;
    }
    println!("{}", outcome.summary);
    Ok(if outcome.pass { 0 } else { 1 })
}

fn write(path: &Path, body: &str) -> Result<(), CliError> {
    fs::write(path, body).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn pretty(v: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn kernel(cfg: &RunConfig) -> KernelParams<f64> {
    match cfg.mode {
        Mode::Metric => KernelParams::Metric {
            s: cfg.s.expect("checked"),
        },
        Mode::Dyadic => KernelParams::Dyadic {
            sigma: cfg.sigma.expect("checked"),
        },
        Mode::Ball => KernelParams::BallMeasure {
            sigma: cfg.sigma.expect("checked"),
        },
    }
}

fn exponent_json(cfg: &RunConfig) -> Value {
    match cfg.mode {
        Mode::Metric => json!({ "s": cfg.s }),
        _ => json!({ "sigma": cfg.sigma }),
    }
}

fn leaf_address<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>, x: &Option<String>) -> Result<Address, CliError> {
    match x {
        None => Ok(tree.leaves()[0].address.clone()),
        Some(text) => {
            let a = tree.model().parse_address(text)?;
            tree.leaf_index(&a)?;
            Ok(a)
        }
    }
}

fn function<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>, cfg: &RunConfig) -> Result<CellFunction<f64>, CliError> {
    Ok(match &cfg.function {
        FunctionSpec::One => CellFunction::constant(tree, 1.0),
        FunctionSpec::Random => CellFunction::random(tree, cfg.seed),
        FunctionSpec::Indicator(a) => CellFunction::indicator(tree, &tree.model().parse_address(a)?)?,
        FunctionSpec::Csv(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            parse_function_csv(tree, &text)?
        }
    })
}

fn dispatch<M: SpaceModel<f64> + Clone>(cfg: &RunConfig, model: M) -> Result<Outcome, CliError> {
    // parameter checks that need the model, before any tree is built
    match cfg.command {
        Command::Energy | Command::Green | Command::Verify(Suite::Duality) => kernel(cfg).validate(&model)?,
        _ => {}
    }
    if let (Command::Green, Mode::Metric, Some(gamma)) = (cfg.command, cfg.mode, model.gamma()) {
        let s = cfg.s.expect("checked");
        if s <= gamma / 2.0 {
            return Err(Error::GreenThreshold { s, bound: gamma / 2.0 }.into());
        }
    }
    let tree = DyadicTree::build(model, cfg.j)?;
    match cfg.command {
        Command::Tree => tree_cmd(&tree),
        Command::Transform => transform(&tree, cfg),
        Command::Energy => energy(&tree, cfg),
        Command::Verify(suite) => verify_cmd(&tree, cfg, suite),
        Command::Green => green(&tree, cfg),
    }
}

fn tree_cmd<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>) -> Result<Outcome, CliError> {
    Ok(Outcome {
        files: vec![("tree.json".into(), pretty(&tree_record(tree)))],
        summary: format!("tree: {} cubes, {} leaves", tree.cube_count(), tree.leaf_count()),
        pass: true,
    })
}

fn transform<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = function(tree, cfg)?;
    let sys = HaarSystem::new(tree);
    let d = sys.forward(&f)?;
    Ok(Outcome {
        files: vec![("decomposition.csv".into(), decomposition_csv(tree, &sys, &d)?)],
        summary: format!("transform: {} coefficients", sys.len() + 1),
        pass: true,
    })
}

fn energy<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let f = function(tree, cfg)?;
    let params = kernel(cfg);
    let (value, file) = match cfg.via {
        Via::Haar => {
            let sys = HaarSystem::new(tree);
            (energy_haar(&sys, &f, cfg.sigma.expect("checked"))?, "energy_haar.json")
        }
        Via::Quadrature => (energy_quadrature(tree, &f, params)?, "energy.json"),
    };
    let l2 = tree.l2_norm_sq(&f)?;
    let report = EnergyReport::new(tree, params, cfg.mode.as_str(), value, l2);
    let mut doc = serde_json::to_value(&report).expect("serialisable");
    doc["via"] = json!(match cfg.via {
        Via::Haar => "haar",
        Via::Quadrature => "quadrature",
    });
    doc["workers"] = json!(cfg.workers);
    Ok(Outcome {
        files: vec![(file.into(), pretty(&doc))],
        summary: format!("energy: {value}"),
        pass: true,
    })
}

fn verify_cmd<M: SpaceModel<f64> + Clone>(
    tree: &DyadicTree<f64, M>,
    cfg: &RunConfig,
    suite: Suite,
) -> Result<Outcome, CliError> {
    let report: SuiteReport = match suite {
        Suite::Christ => verify::christ(tree, cfg.seed),
        Suite::Ultrametric => verify::ultrametric(tree, 10_000, cfg.seed),
        Suite::Lemma1 => {
            let x = leaf_address(tree, &cfg.x)?;
            verify::lemma1(tree, &x, cfg.s.expect("checked"))?
        }
        Suite::Lemma2 => verify::lemma2(tree, cfg.seed)?,
        Suite::Haar => verify::haar(tree, cfg.seed, cfg.tolerances)?,
        Suite::EnergyEquivalence => verify::energy_equivalence(tree, cfg.sigma.expect("checked"), 200, cfg.seed)?,
        Suite::Coercivity => verify::coercivity(
            tree,
            cfg.lambda.expect("checked"),
            cfg.sigma.expect("checked"),
            cfg.seed,
        )?,
        Suite::Duality => verify::duality(tree, kernel(cfg), 100, cfg.seed)?,
    };
    let mut doc = serde_json::to_value(&report).expect("serialisable");
    doc["workers"] = json!(cfg.workers);
    let summary = report
        .assertions
        .iter()
        .map(|a| format!("{} {}", if a.pass { "PASS" } else { "FAIL" }, a.name))
        .chain(std::iter::once(format!(
            "{}: {}",
            suite.as_str(),
            if report.pass { "pass" } else { "fail" }
        )))
        .collect::<Vec<_>>()
        .join("\n");
    Ok(Outcome {
        files: vec![(format!("verify_{}.json", suite.as_str()), pretty(&doc))],
        summary,
        pass: report.pass,
    })
}

fn green<M: SpaceModel<f64>>(tree: &DyadicTree<f64, M>, cfg: &RunConfig) -> Result<Outcome, CliError> {
    let x = leaf_address(tree, &cfg.x)?;
    let lambda = cfg.lambda.unwrap_or(tree.top().measure);
    let sys = HaarSystem::new(tree);
    let problem = GalerkinProblem::assemble(tree, &sys, kernel(cfg), lambda)?;
    let sol = problem.green_function(&x)?;
    let pass = sol.residual_norm <= cfg.tolerances.solver;
    let mut meta = json!({
        "mode": cfg.mode.as_str(),
        "lambda": lambda,
        "J": tree.max_level(),
        "model": tree.model().name(),
        "x": tree.model().format_address(&x),
        "residualNorm": sol.residual_norm,
        "tolerance": cfg.tolerances.solver,
        "solver": sol.solver,
        "basis": problem.len(),
        "factor_convention": "B=2<Du,v>",
        "workers": cfg.workers,
    });
    if let (Some(m), Some(e)) = (meta.as_object_mut(), exponent_json(cfg).as_object()) {
        m.extend(e.clone());
    }
    Ok(Outcome {
        files: vec![
            ("green.csv".into(), function_csv(tree, &sol.function)?),
            ("green.json".into(), pretty(&meta)),
            ("green_plot.csv".into(), plot_csv(tree, &sol.function)?),
        ],
        summary: format!(
            "green: residual {:.3e} ({}), G(x,x) = {}",
            sol.residual_norm,
            if pass { "within tolerance" } else { "above tolerance" },
            sol.function.values()[tree.leaf_index(&x)?]
        ),
        pass,
    })
}
