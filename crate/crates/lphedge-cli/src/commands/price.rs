//! `price`: present value and annualized premium of the protection claim
//! under the chosen model and engine, single-shot or swept over range
//! half-widths.

use lphedge::amm::protection_payoff;
use lphedge::bsm::{pv_v2, pv_v3};
use lphedge::fourier::{pv_v2_mgf, pv_v3_mgf};
use lphedge::mc::{mc_price, sample_gbm_terminal, sample_logsv_terminal};
use lphedge::{
    BsmMgf, BsmParams, LogSvMgf, LogSvParams, McConfig, PositionSpec, PriceRange, Protocol,
    QuadratureConfig, ValuationContext,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    EngineChoice, Layers, MarketState, ModelChoice, PriceArgs, DEFAULT_PATHS, DEFAULT_STEPS,
    DEFAULT_SV,
};
use crate::error::{CliError, Result};
use crate::output::Emitter;

#[derive(Serialize)]
struct SweepRow {
    multiple: f64,
    pv: f64,
    apr: f64,
    /// Monte Carlo standard error; empty for deterministic engines.
    se: Option<f64>,
}

struct Priced {
    pv: f64,
    se: Option<f64>,
}

fn resolve_sv(layers: &Layers, args: &PriceArgs) -> LogSvParams {
    let mut sv = layers.file.sv.unwrap_or(DEFAULT_SV);
    if let Some(v) = args.sv_sigma0 {
        sv.sigma0 = v;
    }
    if let Some(v) = args.sv_theta {
        sv.theta = v;
    }
    if let Some(v) = args.sv_kappa1 {
        sv.kappa1 = v;
    }
    if let Some(v) = args.sv_kappa2 {
        sv.kappa2 = v;
    }
    if let Some(v) = args.sv_beta {
        sv.beta = v;
    }
    if let Some(v) = args.sv_epsilon {
        sv.epsilon = v;
    }
    sv
}

fn value_claim(
    position: &PositionSpec,
    market: &MarketState,
    model: ModelChoice,
    engine: EngineChoice,
    sv: LogSvParams,
    mc: &McConfig,
) -> Result<Priced> {
    let tau = market.tau();
    let ctx = ValuationContext::new(tau, market.p_t, position.p0)?;
    let params = BsmParams::new(market.sigma, market.rate, market.dividend)?;
    let quad = QuadratureConfig::default();
    let pv = match (model, engine) {
        (ModelChoice::Bsm, EngineChoice::Closed) => match position.protocol {
            Protocol::V2 => pv_v2(position, &ctx, &params)?,
            Protocol::V3(_) => pv_v3(position, &ctx, &params)?,
        },
        (ModelChoice::Bsm, EngineChoice::Fourier) => {
            let mgf = BsmMgf::new(params);
            match position.protocol {
                Protocol::V2 => pv_v2_mgf(&mgf, position, &ctx)?,
                Protocol::V3(_) => pv_v3_mgf(&mgf, position, &ctx, &quad)?,
            }
        }
        (ModelChoice::Logsv, EngineChoice::Fourier) => {
            let mgf = LogSvMgf::new(sv)?.with_rates(market.rate, market.dividend)?;
            match position.protocol {
                Protocol::V2 => pv_v2_mgf(&mgf, position, &ctx)?,
                Protocol::V3(_) => pv_v3_mgf(&mgf, position, &ctx, &quad)?,
            }
        }
        (_, EngineChoice::Mc) => {
            let samples = match model {
                ModelChoice::Bsm => sample_gbm_terminal(market.p_t, &params, tau, mc)?,
                ModelChoice::Logsv => sample_logsv_terminal(
                    market.p_t,
                    market.rate - market.dividend,
                    &sv,
                    tau,
                    mc,
                )?,
            };
            let (pv, se) =
                mc_price(&samples, |p| protection_payoff(position, p), market.rate, tau);
            return Ok(Priced { pv, se: Some(se) });
        }
        (ModelChoice::Logsv, EngineChoice::Closed) => {
            return Err(CliError::Usage(
                "the closed engine requires --model bsm; use --engine fourier or mc".into(),
            ))
        }
    };
    Ok(Priced { pv, se: None })
}

pub fn run(layers: &Layers, emitter: &Emitter, args: &PriceArgs) -> Result<()> {
    let position = layers.position(&args.spec)?;
    let market = layers.market(&args.market, position.p0);
    let model = args.model.or(layers.file.model).unwrap_or(ModelChoice::Bsm);
    let engine = args.engine.or(layers.file.engine).unwrap_or(EngineChoice::Closed);
    let sv = resolve_sv(layers, args);
    let mc = McConfig {
        n_paths: args.paths.or(layers.file.paths).unwrap_or(DEFAULT_PATHS),
        n_steps: args.steps.or(layers.file.steps).unwrap_or(DEFAULT_STEPS),
        seed: layers.seed,
        antithetic: true,
    };
    let tau = market.tau();

    let mut summary = json!({ "config": super::base_config(layers, &position) });
    summary["config"]["market"] = json!(market);
    summary["config"]["model"] = json!(model);
    summary["config"]["engine"] = json!(engine);
    if model == ModelChoice::Logsv {
        summary["config"]["sv"] = json!(sv);
    }
    if engine == EngineChoice::Mc {
        summary["config"]["mc"] =
            json!({ "paths": mc.n_paths, "steps": mc.n_steps, "seed": mc.seed });
    }

    let multiples =
        args.range_multiples.clone().or_else(|| layers.file.range_multiples.clone());
    let rows: Vec<SweepRow> = match &multiples {
        None => {
            let priced = value_claim(&position, &market, model, engine, sv, &mc)?;
            summary["pv"] = json!(priced.pv);
            summary["apr"] = json!(priced.pv / tau);
            summary["diagnostics"] = diagnostics(engine, priced.se);
            Vec::new()
        }
        Some(ms) => {
            summary["config"]["range_multiples"] = json!(ms);
            let mut rows = Vec::with_capacity(ms.len());
            for &m in ms {
                let range =
                    PriceRange::new(position.p0 * (-m).exp(), position.p0 * m.exp())?;
                let swept = PositionSpec::from_notional(
                    Protocol::V3(range),
                    position.p0,
                    position.initial_value(),
                    position.kind,
                )?;
                let priced = value_claim(&swept, &market, model, engine, sv, &mc)?;
                rows.push(SweepRow {
                    multiple: m,
                    pv: priced.pv,
                    apr: priced.pv / tau,
                    se: priced.se,
                });
            }
            rows
        }
    };
    emitter.emit("price", summary, &rows)
}

fn diagnostics(engine: EngineChoice, se: Option<f64>) -> Value {
    match engine {
        EngineChoice::Closed => json!({ "engine": "closed" }),
        EngineChoice::Fourier => json!({
            "engine": "fourier",
            "contour_offset": -0.5,
        }),
        EngineChoice::Mc => json!({ "engine": "mc", "se": se }),
    }
}
