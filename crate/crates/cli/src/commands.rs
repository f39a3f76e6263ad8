use std::path::Path;

use coarma_core::coarma::{filter, forecast_percentiles, levels, simulate_path};
use coarma_core::dependence::scan_dependence;
use coarma_core::estimation::{self, residual_diagnostics, scan_argmin, FitConfig};
use coarma_core::evaluation::{backtest, synthetic_series, SyntheticKind, METRIC_COLUMNS};
use coarma_core::garch_link::{ArchCopula, GarchCopula, GarchParams};
use coarma_core::gaussian_equiv::{coarma_psi, verify_equivalence};
use coarma_core::margins::unit_scale;
use coarma_core::model::Side;
use coarma_core::special::norm_ppf;
use coarma_core::{CoarmaError, CoarmaSpec, MarginKind, MarginModel, ModelTemplate, Result};

use crate::io::{fmt, read_column, Output};
use crate::{
    DepmeasureArgs, EquivArgs, EvaluateArgs, FitArgs, ForecastArgs, GarchArgs, NllScanArgs, ResidualsArgs,
    SideArg, SimulateArgs, SyntheticArg,
};

fn preferred_column(kind: MarginKind) -> &'static str {
    if kind == MarginKind::Uniform {
        "u"
    } else {
        "y"
    }
}

fn side_name(s: SideArg) -> &'static str {
    match s {
        SideArg::Ar => "ar",
        SideArg::Mag => "mag",
    }
}

fn fixed_spec(t: &ModelTemplate) -> Result<CoarmaSpec> {
    if t.n_free() > 0 {
        return Err(CoarmaError::Domain(format!("model '{t}' has free parameters; give every value")));
    }
    t.to_spec()
}

pub fn simulate(a: SimulateArgs, out: Option<&Path>) -> Result<()> {
    let spec = fixed_spec(&a.model)?;
    let margin = match (a.model.margin, &a.data) {
        (kind, Some(p)) => MarginModel::fit(kind, &read_column(p, a.column.as_deref(), preferred_column(kind))?)?,
        (MarginKind::Normal, None) => MarginModel::Normal { mean: 0.0, sd: 1.0 },
        (MarginKind::Uniform, None) => MarginModel::Uniform,
        (kind, None) => return Err(CoarmaError::Domain(format!("margin '{kind}' needs --data to fit it"))),
    };
    let path = simulate_path(&spec, a.n, a.seed, a.burn_in)?;
    let mut o = Output::open(out, Some(a.seed))?;
    o.comment(&format!("model={}", a.model))?;
    o.comment(&format!("n={} burn_in={}", a.n, a.burn_in))?;
    o.header(&["t", "u", "eps", "w", "y"])?;
    for t in 0..a.n {
        let y = match margin {
            MarginModel::Normal { mean, sd } => mean + sd * norm_ppf(path.u[t]),
            _ => margin.quantile(path.u[t])?,
        };
        o.record([t.to_string(), fmt(path.u[t]), fmt(path.eps[t]), fmt(path.w[t]), fmt(y)])?;
    }
    o.finish()
}

pub fn fit(a: FitArgs, out: Option<&Path>) -> Result<()> {
    let t = a.model;
    if t.n_free() == 0 {
        return Err(CoarmaError::Domain("model has no free ('?') parameters".into()));
    }
    let raw = read_column(&a.data.data, a.data.column.as_deref(), preferred_column(t.margin))?;
    let data = unit_scale(t.margin, &raw)?;
    let mut cfg = match a.mag_tau_cap {
        Some(c) => {
            if !(c > 0.0 && c < 1.0) {
                return Err(CoarmaError::Domain(format!("tau cap {c} outside (0, 1)")));
            }
            FitConfig::with_tau_cap(t.clone(), a.seed, c)
        }
        None => FitConfig::new(t.clone(), a.seed),
    };
    cfg.restarts = a.restarts.max(1);
    for &(i, lo, hi) in &a.bounds {
        cfg.set_bounds(i, lo, hi)?;
    }
    let res = estimation::fit(&cfg, &data)?;
    let fitted = ModelTemplate::from_spec(t.margin, &res.spec);

    eprintln!("model      {fitted}");
    eprintln!("nll        {:.6}", res.nll);
    eprintln!("converged  {}", res.converged);
    eprintln!("floored    {}", res.floored);
    eprintln!("n          {}", data.len());
    for (k, s) in res.starts.iter().enumerate() {
        eprintln!("start {k}    nll={:.6} evals={} converged={}", s.nll, s.evals, s.converged);
    }

    let mut o = Output::open(out, Some(a.seed))?;
    o.comment(&format!("template={t}"))?;
    o.comment(&format!("model={fitted}"))?;
    o.comment(&format!("nll={}", fmt(res.nll)))?;
    o.comment(&format!("converged={}", res.converged))?;
    o.comment(&format!("floored={}", res.floored))?;
    o.comment(&format!("evaluations={}", res.evaluations))?;
    o.comment(&format!("n={}", data.len()))?;
    o.header(&["slot", "side", "pair", "param", "family", "value", "lower", "upper"])?;
    for (k, (slot, &v)) in t.free_slots().iter().zip(&res.params).enumerate() {
        let side = match slot.side {
            Side::Ar => "ar",
            Side::Mag => "mag",
        };
        let (lo, hi) = cfg.bounds[k];
        o.record([
            k.to_string(),
            side.to_string(),
            slot.pair.to_string(),
            slot.index.to_string(),
            slot.family.code().to_string(),
            fmt(v),
            fmt(lo),
            fmt(hi),
        ])?;
    }
    o.finish()
}

pub fn forecast(a: ForecastArgs, out: Option<&Path>) -> Result<()> {
    let t = a.model;
    let y = read_column(&a.data.data, a.data.column.as_deref(), preferred_column(t.margin))?;
    let cut = if a.split > 0.0 && a.split < 1.0 {
        (y.len() as f64 * a.split).round() as usize
    } else if a.split >= 1.0 && a.split.fract() == 0.0 {
        a.split as usize
    } else {
        return Err(CoarmaError::Domain(format!("split {} is neither a fraction nor a count", a.split)));
    };
    if cut < 10 || cut >= y.len() {
        return Err(CoarmaError::Domain(format!("split leaves {cut} of {} observations for the first segment", y.len())));
    }
    let (old, new) = y.split_at(cut);
    let spec = if t.n_free() > 0 {
        let seed = a.seed.ok_or_else(|| CoarmaError::Domain("free parameters need --seed".into()))?;
        estimation::fit(&FitConfig::new(t.clone(), seed), &unit_scale(t.margin, old)?)?.spec
    } else {
        t.to_spec()?
    };
    let margin = MarginModel::fit(t.margin, old)?;
    let grid = forecast_percentiles(&spec, &margin, old, new)?;

    let mut o = Output::open(out, a.seed)?;
    o.comment(&format!("model={}", ModelTemplate::from_spec(t.margin, &spec)))?;
    o.comment(&format!("split={cut} n_forecast={} clamped={}", new.len(), grid.clamped))?;
    let mut cols: Vec<String> = ["t", "y", "pit", "mean", "median"].iter().map(|s| s.to_string()).collect();
    cols.extend(levels().iter().map(|l| format!("q{:02}", (l * 100.0).round() as usize)));
    o.header(&cols)?;
    for (k, row) in grid.rows.iter().enumerate() {
        let mut rec = vec![(cut + k).to_string(), fmt(new[k]), fmt(grid.pit[k]), fmt(grid.mean(k)), fmt(grid.median(k))];
        rec.extend(row.iter().map(|&q| fmt(q)));
        o.record(rec)?;
    }
    o.finish()
}

pub fn evaluate(a: EvaluateArgs, out: Option<&Path>) -> Result<()> {
    let models = crate::config::load_models(&a.models)?;
    let (series, source) = match (&a.data, a.synthetic) {
        (Some(p), None) => (read_column(p, a.column.as_deref(), "y")?, p.display().to_string()),
        (None, Some(k)) => {
            let kind = match k {
                SyntheticArg::Arma => SyntheticKind::ArmaLike,
                SyntheticArg::Regime => SyntheticKind::RegimeMixture,
            };
            (synthetic_series(kind, a.n, a.seed), format!("synthetic:{}", if matches!(k, SyntheticArg::Arma) { "arma" } else { "regime" }))
        }
        _ => return Err(CoarmaError::Domain("give exactly one of --data or --synthetic".into())),
    };
    let rep = backtest(&models, &series, a.train, a.val, a.seed)?;
    if !rep.audit() {
        return Err(CoarmaError::Numeric { t: 0, detail: "evaluation windows differ across models".into() });
    }

    eprintln!(
        "{:<24} {:<10} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9}  fitted",
        "model", "class", "CRPS", "NLL", "PBS05", "PBS95", "RMSE", "MAE"
    );
    for r in &rep.rows {
        let m = &r.test;
        eprintln!(
            "{:<24} {:<10} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  {}{}",
            r.name,
            r.class,
            m.crps,
            m.nll,
            m.pbs05,
            m.pbs95,
            m.rmse,
            m.mae,
            r.fitted,
            if r.selected { " *" } else { "" }
        );
    }

    let mut o = Output::open(out, Some(a.seed))?;
    o.comment(&format!("data={source} n={}", series.len()))?;
    o.comment(&format!(
        "train={}..{} val={}..{} test={}..{}",
        rep.split.train.0, rep.split.train.1, rep.split.val.0, rep.split.val.1, rep.split.test.0, rep.split.test.1
    ))?;
    let mut cols: Vec<String> = ["segment", "name", "class", "fitted", "selected"].iter().map(|s| s.to_string()).collect();
    cols.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    o.header(&cols)?;
    for (segment, pick) in [("val", 0), ("test", 1)] {
        for r in &rep.rows {
            let m = if pick == 0 { &r.val } else { &r.test };
            let mut rec = vec![segment.to_string(), r.name.clone(), r.class.clone(), r.fitted.clone(), r.selected.to_string()];
            let v = m.values();
            rec.extend(v[..6].iter().map(|&x| fmt(x)));
            rec.push(m.n_eval.to_string());
            o.record(rec)?;
        }
    }
    o.finish()
}

pub fn depmeasure(a: DepmeasureArgs, out: Option<&Path>) -> Result<()> {
    let spec = fixed_spec(&a.model)?;
    if a.nsim < 10 {
        return Err(CoarmaError::Domain("--nsim must be at least 10".into()));
    }
    let rows = scan_dependence(&spec, a.side.into(), a.index, &a.grid, a.nsim, a.seed, a.u, a.nodes)?;
    let mut o = Output::open(out, Some(a.seed))?;
    o.comment(&format!("model={} side={} index={} u={} nsim={}", a.model, side_name(a.side), a.index, a.u, a.nsim))?;
    o.header(&["parameter", "rho_quad", "rho_sim", "rho_sim_se", "tdc_l", "tdc_u", "order_l", "order_u"])?;
    for r in rows {
        let m = r.measures;
        o.numbers(&[r.param, r.rho_quad, r.rho_sim, r.rho_sim_se, m.lower_tdc, m.upper_tdc, m.lower_order, m.upper_order])?;
    }
    o.finish()
}

pub fn equiv(a: EquivArgs, out: Option<&Path>) -> Result<()> {
    let c = coarma_psi(&a.alphas, &a.betas)?;
    let check = if a.n > 0 {
        let seed = a.seed.ok_or_else(|| CoarmaError::Domain("the simulation check needs --seed".into()))?;
        Some(verify_equivalence(&a.alphas, &a.betas, a.n, seed, a.max_lag)?)
    } else {
        None
    };
    let mut o = Output::open(out, a.seed)?;
    o.comment(&format!("alphas={:?} betas={:?}", a.alphas, a.betas))?;
    o.header(&["name", "index", "value"])?;
    for (i, &v) in c.phi.iter().enumerate() {
        o.record(["phi".into(), (i + 1).to_string(), fmt(v)])?;
    }
    for (i, &v) in c.psi.iter().enumerate() {
        o.record(["psi".into(), (i + 1).to_string(), fmt(v)])?;
    }
    o.record(["sigma".into(), "0".into(), fmt(c.innovation_sd)])?;
    if let Some(rep) = check {
        for l in &rep.lags {
            let name = if l.lag == 0 { "variance" } else { "acf" };
            o.record([format!("{name}_sample"), l.lag.to_string(), fmt(l.sample)])?;
            o.record([format!("{name}_theory"), l.lag.to_string(), fmt(l.theory)])?;
            o.record([format!("{name}_se"), l.lag.to_string(), fmt(l.se)])?;
        }
        o.record(["pass".into(), "0".into(), (rep.pass as u8).to_string()])?;
    }
    o.finish()
}

pub fn garch_copula(a: GarchArgs, out: Option<&Path>) -> Result<()> {
    let params = GarchParams::new(a.alpha0, a.alpha1, a.beta1)?;
    if a.grid == 0 {
        return Err(CoarmaError::Domain("--grid must be positive".into()));
    }
    let gc = GarchCopula::build(params, a.nsim, a.seed)?;
    let arch = if params.is_arch() { Some(ArchCopula::new(params, gc.psi.clone())?) } else { None };
    let rows = gc.grid(a.grid)?;
    let mut o = Output::open(out, Some(a.seed))?;
    o.comment(&format!("alpha0={} alpha1={} beta1={} nsim={}", a.alpha0, a.alpha1, a.beta1, a.nsim))?;
    o.comment(&format!("log_moment={}", fmt(params.log_moment())))?;
    let mut cols = vec!["u", "v", "ar_ccdf", "ar_ccdf_unfolded", "mag_ccdf"];
    if arch.is_some() {
        cols.push("arch_ccdf");
    }
    o.header(&cols)?;
    for r in rows {
        let mut v = r.to_vec();
        if let Some(ac) = &arch {
            v.push(ac.ccdf(r[0], r[1])?);
        }
        o.numbers(&v)?;
    }
    o.finish()
}

pub fn nll_scan(a: NllScanArgs, out: Option<&Path>) -> Result<()> {
    let spec = fixed_spec(&a.model)?;
    let raw = read_column(&a.data.data, a.data.column.as_deref(), preferred_column(a.model.margin))?;
    let data = unit_scale(a.model.margin, &raw)?;
    let pts = estimation::nll_scan(&spec, a.side.into(), a.index, &data, &a.grid)?;
    let mut o = Output::open(out, None)?;
    o.comment(&format!("model={} side={} index={} n={}", a.model, side_name(a.side), a.index, data.len()))?;
    if let Some(b) = scan_argmin(&pts) {
        o.comment(&format!("argmin={} nll={}", fmt(b.value), fmt(b.nll)))?;
    }
    o.header(&["value", "nll", "floored"])?;
    for p in pts {
        o.record([fmt(p.value), fmt(p.nll), p.floored.to_string()])?;
    }
    o.finish()
}

pub fn residuals(a: ResidualsArgs, out: Option<&Path>) -> Result<()> {
    let spec = fixed_spec(&a.model)?;
    let raw = read_column(&a.data.data, a.data.column.as_deref(), preferred_column(a.model.margin))?;
    let data = unit_scale(a.model.margin, &raw)?;
    let rep = residual_diagnostics(&spec, &data)?;
    let f = filter(&spec, &data)?;
    let mut o = Output::open(out, None)?;
    o.comment(&format!("model={}", a.model))?;
    o.comment(&format!("n={} ks_statistic={} ks_p_value={}", rep.n, fmt(rep.ks.statistic), fmt(rep.ks.p_value)))?;
    o.comment(&format!(
        "sign_lag1={} boundary_fraction={} mean_drift={} var_drift={}",
        fmt(rep.sign_lag1),
        fmt(rep.boundary_fraction),
        fmt(rep.mean_drift),
        fmt(rep.var_drift)
    ))?;
    o.comment(&format!("oscillation={} drift={}", rep.oscillation, rep.drift))?;
    o.header(&["t", "u", "eps", "w", "placeholder"])?;
    for t in 0..data.len() {
        o.record([t.to_string(), fmt(data[t]), fmt(f.eps[t]), fmt(f.w[t]), ((t < spec.r()) as u8).to_string()])?;
    }
    o.finish()
}
