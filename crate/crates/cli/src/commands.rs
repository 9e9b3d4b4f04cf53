use anyhow::{anyhow, bail, Context, Result};
use serde::Serialize;
use twinfock::metrology::optimal_sensitivity;
use twinfock::{
    fringe_coefficients, limits, parity_expectation, recommend, sensitivity, sweep, visibility, Constraint, LossPair,
    Objective, Phase, Quantity, SensitivityPoint, SweepGrid, SweepRow, TwinFockState, Uncertainty,
};

use crate::args::{
    Command, CommonArgs, Format, LossArgs, LossGridArgs, OptimalArgs, PointArgs, RecommendArgs, StateArgs,
    SweepArgs, Table1Args, VisibilityArgs,
};
use crate::output::{self, cell, uncertainty_cell};

const SWEEP_HEADER: [&str; 6] = ["m", "mprime", "loss_a", "loss_b", "phi", "value"];

pub fn run(command: Command) -> Result<()> {
    let (text, common) = match command {
        Command::Expect(a) => (expect(&a)?, a.common),
        Command::Visibility(a) => (visibility_cmd(&a)?, a.common),
        Command::Sensitivity(a) => (sensitivity_cmd(&a)?, a.common),
        Command::Optimal(a) => (optimal_cmd(&a)?, a.common),
        Command::Table1(a) => (table1(&a)?, a.common),
        Command::Sweep(a) => (sweep_cmd(&a)?, a.common),
        Command::Recommend(a) => (recommend_cmd(&a)?, a.common),
    };
    output::emit(&text, common.output.as_deref())
}

fn state_from(m: u32, mprime: u32) -> Result<TwinFockState> {
    TwinFockState::new(m, mprime).map_err(|e| anyhow!("invalid --m/--mprime: {e}"))
}

fn state(args: &StateArgs) -> Result<TwinFockState> {
    state_from(args.m, args.mprime)
}

fn loss(args: &LossArgs) -> Result<LossPair> {
    let a = args.loss_a.or(args.loss).context("missing --loss-a (or --loss)")?;
    let b = args.loss_b.or(args.loss).context("missing --loss-b (or --loss)")?;
    Ok(LossPair::new(a, b)?)
}

fn phase(phi: f64) -> Result<Phase> {
    Phase::new(phi).map_err(|e| anyhow!("invalid --phi: {e}"))
}

fn format_or(common: &CommonArgs, default: Format) -> Format {
    common.format.unwrap_or(default)
}

/// `steps` evenly spaced values from `start` to `stop` inclusive.
pub fn linspace(flag: &str, start: f64, stop: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => bail!("--{flag}-steps must be at least 1"),
        1 => Ok(vec![start]),
        n => Ok((0..n)
            .map(|i| if i == n - 1 { stop } else { start + (stop - start) * i as f64 / (n - 1) as f64 })
            .collect()),
    }
}

/// Arm-A losses plus an optional independent arm-B axis.
type LossAxes = (Vec<f64>, Option<Vec<f64>>);

fn loss_grid(args: &LossGridArgs) -> Result<Option<LossAxes>> {
    let primary = match (args.loss_start, args.loss_stop, args.loss_steps) {
        (None, None, None) => return Ok(None),
        (Some(a), Some(b), Some(n)) => linspace("loss", a, b, n)?,
        _ => bail!("--loss-start, --loss-stop and --loss-steps must be given together"),
    };
    let arm_b = match (args.loss_b_start, args.loss_b_stop, args.loss_b_steps) {
        (None, None, None) => None,
        (Some(a), Some(b), Some(n)) => Some(linspace("loss-b", a, b, n)?),
        _ => bail!("--loss-b-start, --loss-b-stop and --loss-b-steps must be given together"),
    };
    Ok(Some((primary, arm_b)))
}

fn grid_for(states: Vec<TwinFockState>, losses: (Vec<f64>, Option<Vec<f64>>), phases: Vec<Phase>) -> Result<SweepGrid> {
    Ok(match losses {
        (la, Some(lb)) => SweepGrid::product(states, &la, &lb, phases)?,
        (l, None) => SweepGrid::equal_arms(states, &l, phases)?,
    })
}

fn sweep_rows_csv(rows: &[SweepRow]) -> String {
    output::csv(
        &SWEEP_HEADER,
        rows.iter().map(|r| {
            vec![
                r.state.m().to_string(),
                r.state.m_prime().to_string(),
                cell(r.loss.loss_a()),
                cell(r.loss.loss_b()),
                r.phi.map(|p| cell(p.radians())).unwrap_or_default(),
                uncertainty_cell(r.value),
            ]
        }),
    )
}

fn sweep_rows_json(rows: &[SweepRow]) -> Result<String> {
    #[derive(Serialize)]
    struct Row {
        m: u32,
        mprime: u32,
        loss_a: f64,
        loss_b: f64,
        phi: Option<f64>,
        value: Uncertainty,
    }
    let rows: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            m: r.state.m(),
            mprime: r.state.m_prime(),
            loss_a: r.loss.loss_a(),
            loss_b: r.loss.loss_b(),
            phi: r.phi.map(|p| p.radians()),
            value: r.value,
        })
        .collect();
    output::json(&rows)
}

fn render_rows(rows: &[SweepRow], format: Format) -> Result<String> {
    match format {
        Format::Csv => Ok(sweep_rows_csv(rows)),
        Format::Json => sweep_rows_json(rows),
    }
}

fn expect(args: &PointArgs) -> Result<String> {
    let (s, l, p) = (state(&args.state)?, loss(&args.loss)?, phase(args.phi)?);
    let fringe = fringe_coefficients(s, l);

    #[derive(Serialize)]
    struct Expect {
        m: u32,
        mprime: u32,
        loss_a: f64,
        loss_b: f64,
        phi: f64,
        k1: f64,
        k2: f64,
        expectation: f64,
    }
    let point = Expect {
        m: s.m(),
        mprime: s.m_prime(),
        loss_a: l.loss_a(),
        loss_b: l.loss_b(),
        phi: p.radians(),
        k1: fringe.k1,
        k2: fringe.k2,
        expectation: parity_expectation(s, l, p),
    };
    match format_or(&args.common, Format::Json) {
        Format::Json => output::json(&point),
        Format::Csv => Ok(output::csv(
            &["m", "mprime", "loss_a", "loss_b", "phi", "k1", "k2", "expectation"],
            [vec![
                point.m.to_string(),
                point.mprime.to_string(),
                cell(point.loss_a),
                cell(point.loss_b),
                cell(point.phi),
                cell(point.k1),
                cell(point.k2),
                cell(point.expectation),
            ]],
        )),
    }
}

fn visibility_cmd(args: &VisibilityArgs) -> Result<String> {
    let s = state(&args.state)?;
    if let Some(losses) = loss_grid(&args.grid)? {
        let rows = sweep(&grid_for(vec![s], losses, Vec::new())?, Quantity::Visibility)?;
        return render_rows(&rows, format_or(&args.common, Format::Csv));
    }

    let l = loss(&args.loss)?;
    let report = visibility(s, l);
    #[derive(Serialize)]
    struct Vis {
        m: u32,
        mprime: u32,
        loss_a: f64,
        loss_b: f64,
        signal: f64,
        visibility: f64,
    }
    let point = Vis {
        m: s.m(),
        mprime: s.m_prime(),
        loss_a: l.loss_a(),
        loss_b: l.loss_b(),
        signal: report.signal,
        visibility: report.visibility,
    };
    match format_or(&args.common, Format::Json) {
        Format::Json => output::json(&point),
        Format::Csv => Ok(output::csv(
            &["m", "mprime", "loss_a", "loss_b", "signal", "visibility"],
            [vec![
                point.m.to_string(),
                point.mprime.to_string(),
                cell(point.loss_a),
                cell(point.loss_b),
                cell(point.signal),
                cell(point.visibility),
            ]],
        )),
    }
}

fn render_sensitivity(s: TwinFockState, l: LossPair, point: SensitivityPoint, common: &CommonArgs) -> Result<String> {
    #[derive(Serialize)]
    struct Sens {
        m: u32,
        mprime: u32,
        loss_a: f64,
        loss_b: f64,
        phi: f64,
        delta_phi: Uncertainty,
        snl: Uncertainty,
        hl: Uncertainty,
        effective_photons: f64,
    }
    let row = Sens {
        m: s.m(),
        mprime: s.m_prime(),
        loss_a: l.loss_a(),
        loss_b: l.loss_b(),
        phi: point.phi.radians(),
        delta_phi: point.delta_phi,
        snl: point.shot_noise_limit,
        hl: point.heisenberg_limit,
        effective_photons: point.effective_photons,
    };
    match format_or(common, Format::Json) {
        Format::Json => output::json(&row),
        Format::Csv => Ok(output::csv(
            &["m", "mprime", "loss_a", "loss_b", "phi", "delta_phi", "snl", "hl", "effective_photons"],
            [vec![
                row.m.to_string(),
                row.mprime.to_string(),
                cell(row.loss_a),
                cell(row.loss_b),
                cell(row.phi),
                uncertainty_cell(row.delta_phi),
                uncertainty_cell(row.snl),
                uncertainty_cell(row.hl),
                cell(row.effective_photons),
            ]],
        )),
    }
}

fn sensitivity_cmd(args: &PointArgs) -> Result<String> {
    let (s, l, p) = (state(&args.state)?, loss(&args.loss)?, phase(args.phi)?);
    render_sensitivity(s, l, sensitivity(s, l, p), &args.common)
}

fn optimal_cmd(args: &OptimalArgs) -> Result<String> {
    let (s, l) = (state(&args.state)?, loss(&args.loss)?);
    render_sensitivity(s, l, optimal_sensitivity(s, l), &args.common)
}

fn table1(args: &Table1Args) -> Result<String> {
    if args.delta_m == 0 {
        bail!("--delta-m must be positive");
    }
    if args.mprime_step == 0 {
        bail!("--mprime-step must be positive");
    }
    let l = LossPair::equal(args.loss)?;
    let states = (0..)
        .step_by(args.mprime_step as usize)
        .map(|mp| (mp + args.delta_m, mp))
        .take_while(|&(m, mp)| m + mp <= args.max_total)
        .map(|(m, mp)| state_from(m, mp))
        .collect::<Result<Vec<_>>>()?;
    if states.is_empty() {
        bail!("--max-total {} admits no state with delta m {}", args.max_total, args.delta_m);
    }

    #[derive(Serialize)]
    struct Row {
        m: u32,
        mprime: u32,
        delta_phi: Uncertainty,
        snl: f64,
    }
    let rows = states
        .into_iter()
        .map(|s| {
            Ok(Row {
                m: s.m(),
                mprime: s.m_prime(),
                delta_phi: optimal_sensitivity(s, l).delta_phi,
                snl: limits(s, l)?.snl,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    match format_or(&args.common, Format::Csv) {
        Format::Json => output::json(&rows),
        Format::Csv => Ok(output::csv(
            &["m", "mprime", "delta_phi", "snl"],
            rows.iter()
                .map(|r| vec![r.m.to_string(), r.mprime.to_string(), uncertainty_cell(r.delta_phi), cell(r.snl)]),
        )),
    }
}

fn parse_states(list: &str) -> Result<Vec<TwinFockState>> {
    list.split(',')
        .map(|item| {
            let (m, mp) = item
                .trim()
                .split_once(':')
                .with_context(|| format!("invalid --states entry '{item}', expected m:mprime"))?;
            let m = m.trim().parse().with_context(|| format!("invalid m in --states entry '{item}'"))?;
            let mp = mp.trim().parse().with_context(|| format!("invalid mprime in --states entry '{item}'"))?;
            TwinFockState::new(m, mp).map_err(|e| anyhow!("invalid --states entry '{item}': {e}"))
        })
        .collect()
}

fn sweep_cmd(args: &SweepArgs) -> Result<String> {
    let quantity: Quantity = args.quantity.parse().map_err(|e| anyhow!("invalid --quantity: {e}"))?;
    let states = match (&args.states, args.m, args.mprime) {
        (Some(list), None, None) => parse_states(list)?,
        (None, Some(m), Some(mp)) => vec![state_from(m, mp)?],
        (None, _, _) => bail!("give --m and --mprime, or --states"),
        (Some(_), _, _) => bail!("--states cannot be combined with --m/--mprime"),
    };
    let losses = loss_grid(&args.grid)?.context("--loss-start, --loss-stop and --loss-steps are required")?;
    let phases = match (args.phi, args.phi_start, args.phi_stop, args.phi_steps) {
        (None, None, None, None) => Vec::new(),
        (Some(p), None, None, None) => vec![phase(p)?],
        (None, Some(a), Some(b), Some(n)) => linspace("phi", a, b, n)?.into_iter().map(phase).collect::<Result<_>>()?,
        _ => bail!("give --phi, or all of --phi-start, --phi-stop and --phi-steps"),
    };
    if quantity != Quantity::Visibility && phases.is_empty() {
        bail!("--quantity {} needs --phi or a phase grid", args.quantity);
    }
    let rows = sweep(&grid_for(states, losses, phases)?, quantity)?;
    render_rows(&rows, format_or(&args.common, Format::Csv))
}

fn recommend_cmd(args: &RecommendArgs) -> Result<String> {
    let objective: Objective = args.objective.parse().map_err(|e| anyhow!("invalid --objective: {e}"))?;
    let l = loss(&args.loss)?;
    let constraint = match args.delta_m {
        Some(delta_m) => Constraint::FixedDeltaM { delta_m, max_total: args.max_total },
        None => Constraint::MaxTotal(args.max_total),
    };
    let entries = recommend(l, constraint, objective)?;
    match format_or(&args.common, Format::Json) {
        Format::Json => output::json(&entries),
        Format::Csv => Ok(output::csv(
            &["rank", "m", "mprime", "objective", "objective_value", "beats_snl"],
            entries.iter().map(|e| {
                vec![
                    e.rank.to_string(),
                    e.state.m().to_string(),
                    e.state.m_prime().to_string(),
                    match e.objective {
                        Objective::Visibility => "visibility".into(),
                        Objective::OptimalSensitivity => "optimal_sensitivity".into(),
                    },
                    uncertainty_cell(e.objective_value),
                    e.beats_snl.to_string(),
                ]
            }),
        )),
    }
}
