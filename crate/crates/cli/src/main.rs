use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use eqmorse::coeff::{CoefficientSystem, SystemKind};
use eqmorse::complexes::{homology, HomologySummary, Ring};
use eqmorse::fixture::{parse_kind, Fixture, ManifoldFixture, DEFAULT_SEEDS};
use eqmorse::groups::FiniteGroup;
use eqmorse::morse::{
    build_cutoffs_shrinking, critical_orbits, morse_complex, morse_differentials, morse_filtration,
    representation_cell_groups, CriticalPoint, EqFunction, FlowOptions, MorseData, RepFactor, Representation,
    DEFAULT_DELTA,
};
use eqmorse::smith::{smith_report, smith_report_morse};
use eqmorse::specseq::{einfty_check, page_grid, pages_csv, spectral_sequence};

#[derive(Parser)]
#[command(name = "eqmorse", version, about = "Equivariant Morse theory for finite group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct Common {
    /// Fixture file (TOML).
    fixture: PathBuf,
    /// Coefficient system; may be repeated. Defaults to the fixture's list.
    #[arg(long)]
    coeff: Vec<String>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Bredon homology tables of a G-CW fixture, checked against the cellular oracle.
    Bredon {
        #[command(flatten)]
        common: Common,
        /// Work over F_p instead of the integers.
        #[arg(long)]
        p: Option<u64>,
    },
    /// Critical points, stability, optional surgery, differentials and homology.
    Morse {
        #[command(flatten)]
        common: Common,
        /// Apply the stabilizing construction at every charted orbit.
        #[arg(long)]
        stabilize: bool,
        /// Seeds per axis of the search grid.
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: usize,
        /// Plateau half-width of the cutoffs.
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Spectral sequence pages of the orbit-type or Morse filtration.
    Specseq {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        stabilize: bool,
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
    /// Homology of interior, stable and unstable C₂ representation cells.
    Cells {
        /// Index of the critical point.
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Smith inequalities and the mod-p Euler congruence.
    Smith {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        p: u64,
        #[arg(long)]
        stabilize: bool,
        #[arg(long, default_value_t = DEFAULT_SEEDS)]
        seeds: usize,
        #[arg(long, default_value_t = DEFAULT_DELTA)]
        delta: f64,
    },
}

/// A finished report and whether every invariant it checked held.
struct Report {
    text: String,
    ok: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(report) => {
            print!("{}", report.text);
            if report.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("invariant check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Report> {
    match command {
        Command::Bredon { common, p } => bredon(&common, p),
        Command::Morse { common, stabilize, seeds, delta } => morse(&common, stabilize, seeds, delta),
        Command::Specseq { common, p, stabilize, seeds, delta } => specseq(&common, p, stabilize, seeds, delta),
        Command::Cells { k, format } => cells(k, format),
        Command::Smith { common, p, stabilize, seeds, delta } => smith(&common, p, stabilize, seeds, delta),
    }
}

fn load(common: &Common) -> Result<(Fixture, Vec<SystemKind>, Format)> {
    let fx = Fixture::load(&common.fixture)?;
    let kinds = if common.coeff.is_empty() {
        fx.coefficients.clone()
    } else {
        common.coeff.iter().map(|c| parse_kind(c)).collect::<eqmorse::Result<_>>()?
    };
    let kinds = if kinds.is_empty() { vec![SystemKind::Singular] } else { kinds };
    let format = match (common.format, fx.format.as_deref()) {
        (Some(f), _) => f,
        (None, Some("csv")) => Format::Csv,
        (None, Some("text") | None) => Format::Text,
        (None, Some(other)) => bail!("unknown format {other:?} in fixture"),
    };
    Ok((fx, kinds, format))
}

fn header(command: &str, fixture: &str, settings: &[(&str, String)]) -> String {
    let mut out = format!("# eqmorse {command} fixture={fixture}");
    for (k, v) in settings {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    out
}

fn format_name(f: Format) -> String {
    match f {
        Format::Text => "text".into(),
        Format::Csv => "csv".into(),
    }
}

fn ring_of(p: Option<u64>) -> Ring {
    p.map_or(Ring::Integers, Ring::Prime)
}

/// Fixed-precision float with negative zero suppressed.
fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

fn coords(x: &[f64]) -> String {
    x.iter().map(|&t| num(t)).collect::<Vec<_>>().join(" ")
}

fn homology_rows(out: &mut String, format: Format, label: &str, h: &HomologySummary, top: i64) {
    for n in 0..=top {
        let g = h.degree(n);
        match format {
            Format::Text => {
                let _ = writeln!(out, "{label:<20} H{n} = {}", g.render(h.ring));
            }
            Format::Csv => {
                let torsion = g.torsion.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(";");
                let _ = writeln!(out, "{label},{n},{},{torsion}", g.rank);
            }
        }
    }
}

fn bredon(common: &Common, p: Option<u64>) -> Result<Report> {
    let (fx, kinds, format) = load(common)?;
    let x = fx.gcw().context("bredon needs a [gcw] fixture")?;
    let ring = ring_of(p);
    let mut text = header("bredon", &fx.name, &[("ring", ring.to_string()), ("format", format_name(format))]);
    if format == Format::Csv {
        text.push_str("system,degree,rank,torsion\n");
    }
    let mut ok = true;
    let top = x.dimension() as i64;
    for kind in &kinds {
        let coeff = CoefficientSystem::covariant(x.group(), kind.clone(), ring)?;
        let h = homology(&x.bredon_chain_complex(&coeff)?);
        let oracle = homology(&x.oracle_complex(kind)?.with_ring(ring)?);
        homology_rows(&mut text, format, &kind.name(), &h, top);
        if !h.same_groups(&oracle) {
            ok = false;
            let _ = writeln!(text, "# {kind}: cellular oracle gives {oracle}");
        }
    }
    Ok(Report { text, ok })
}

fn point_rows(out: &mut String, format: Format, label: &str, crits: &[CriticalPoint]) {
    for c in crits {
        match format {
            Format::Text => {
                let _ = writeln!(
                    out,
                    "{label:<7} [{}] value {} index {} |stab| {} {}",
                    coords(&c.coords),
                    num(c.value),
                    c.index,
                    c.stabilizer.order(),
                    if c.stable { "stable" } else { "unstable" }
                );
            }
            Format::Csv => {
                let _ = writeln!(
                    out,
                    "{label},{},{},{},{},{}",
                    coords(&c.coords),
                    num(c.value),
                    c.index,
                    c.stabilizer.order(),
                    c.stable
                );
            }
        }
    }
}

/// Critical points (after optional surgery) and Morse data when every point
/// is stable.
struct MorseRun {
    before: Vec<CriticalPoint>,
    after: Option<Vec<CriticalPoint>>,
    data: Option<MorseData>,
    note: Option<String>,
}

fn morse_run(m: &ManifoldFixture, stabilize: bool, seeds: usize, delta: f64) -> Result<MorseRun> {
    let before = m.critical_points(&m.function, seeds, &[])?;
    let (f, after): (Arc<dyn EqFunction>, Option<Vec<CriticalPoint>>) = if stabilize {
        let cut = build_cutoffs_shrinking(delta)?;
        if cut.delta() != delta {
            log::warn!("plateau half-width shrunk from {delta} to {}", cut.delta());
        }
        let st = m.stabilize(&before, &cut)?;
        let after = m.critical_points(st.function.as_ref(), seeds, &st.predicted)?;
        (st.function, Some(after))
    } else {
        (Arc::new(m.function.clone()), None)
    };
    let last = after.as_ref().unwrap_or(&before);
    if let Some(c) = last.iter().find(|c| !c.stable) {
        let note = format!("unstable critical point at [{}]; rerun with --stabilize", coords(&c.coords));
        return Ok(MorseRun { before, after, data: None, note: Some(note) });
    }
    let data = morse_differentials(f.as_ref(), &m.manifold, last, &FlowOptions::default())?;
    Ok(MorseRun { before, after, data: Some(data), note: None })
}

fn morse(common: &Common, stabilize: bool, seeds: usize, delta: f64) -> Result<Report> {
    let (fx, kinds, format) = load(common)?;
    let m = fx.manifold().context("morse needs a [manifold] fixture")?;
    let settings = [
        ("seeds", seeds.to_string()),
        ("delta", delta.to_string()),
        ("stabilize", stabilize.to_string()),
        ("ring", "F2".into()),
        ("format", format_name(format)),
    ];
    let mut text = header("morse", &fx.name, &settings);
    let run = morse_run(m, stabilize, seeds, delta)?;
    if format == Format::Csv {
        text.push_str("stage,coords,value,index,stabilizer_order,stable\n");
    } else {
        let _ = writeln!(text, "before: {} critical points", run.before.len());
    }
    point_rows(&mut text, format, "before", &run.before);
    if let Some(after) = &run.after {
        if format == Format::Text {
            let _ = writeln!(text, "after: {} critical points", after.len());
        }
        point_rows(&mut text, format, "after", after);
        let orbits = critical_orbits(&m.manifold, after)?;
        if format == Format::Text {
            let sizes: Vec<String> = orbits.iter().map(|o| format!("{}(index {})", o.size(), o.index())).collect();
            let _ = writeln!(text, "orbits: {}", sizes.join(" "));
        }
    }
    let mut ok = true;
    if let Some(note) = &run.note {
        let _ = writeln!(text, "# {note}");
        return Ok(Report { text, ok: false });
    }
    let data = run.data.expect("stable run has Morse data");
    if data.unresolved > 0 {
        ok = false;
    }
    if format == Format::Csv {
        text.push_str("flow,source,target,coset,count\n");
    } else {
        let resolved = data.trajectories - data.unresolved - data.escaped;
        let _ = writeln!(
            text,
            "trajectories: {resolved} resolved, {} escaped, {} unresolved",
            data.escaped, data.unresolved
        );
    }
    for c in &data.flows {
        match format {
            Format::Text => {
                let _ = writeln!(
                    text,
                    "orbit {} -> orbit {} via coset {}: {} lines (mod 2: {})",
                    c.source,
                    c.target,
                    c.morphism.coset(),
                    c.count,
                    c.parity()
                );
            }
            Format::Csv => {
                let _ = writeln!(text, "flow,{},{},{},{}", c.source, c.target, c.morphism.coset(), c.count);
            }
        }
    }
    if format == Format::Csv {
        text.push_str("system,degree,rank,torsion\n");
    }
    for kind in &kinds {
        let coeff = CoefficientSystem::covariant(&data.group, kind.clone(), Ring::Prime(2))?;
        match morse_complex(&data, &coeff) {
            Ok(c) => homology_rows(&mut text, format, &kind.name(), &homology(&c), data.dim as i64),
            Err(e) => {
                ok = false;
                let _ = writeln!(text, "# {kind}: {e}");
            }
        }
    }
    Ok(Report { text, ok })
}

fn specseq(common: &Common, p: u64, stabilize: bool, seeds: usize, delta: f64) -> Result<Report> {
    let (fx, kinds, format) = load(common)?;
    let mut settings = vec![("ring", format!("F{p}")), ("format", format_name(format))];
    if fx.manifold().is_some() {
        settings.extend([
            ("seeds", seeds.to_string()),
            ("delta", delta.to_string()),
            ("stabilize", stabilize.to_string()),
        ]);
    }
    let mut text = header("specseq", &fx.name, &settings);
    let data = match fx.manifold() {
        Some(m) => {
            let run = morse_run(m, stabilize, seeds, delta)?;
            match run.data {
                Some(d) => Some(d),
                None => bail!("{}", run.note.unwrap_or_default()),
            }
        }
        None => None,
    };
    let mut ok = true;
    for kind in &kinds {
        let fc = match (&data, fx.gcw()) {
            (Some(d), _) => {
                morse_filtration(d, &CoefficientSystem::covariant(&d.group, kind.clone(), Ring::Prime(p))?)?
            }
            (None, Some(x)) => {
                x.orbit_type_filtration(&CoefficientSystem::covariant(x.group(), kind.clone(), Ring::Prime(p))?)?
            }
            (None, None) => unreachable!("fixtures carry a body"),
        };
        let pages = spectral_sequence(&fc);
        let check = einfty_check(&fc);
        ok &= check.passes;
        let _ = writeln!(text, "## system={kind} converges={}", check.passes);
        match format {
            Format::Csv => text.push_str(&pages_csv(&pages)),
            Format::Text => {
                for page in &pages {
                    text.push_str(&page_grid(page));
                }
            }
        }
    }
    Ok(Report { text, ok })
}

fn cells(k: usize, format: Format) -> Result<Report> {
    if k == 0 {
        bail!("index k must be at least 1");
    }
    let g = FiniteGroup::cyclic(2);
    let (e, whole) = (g.trivial_subgroup(), g.whole());
    let kinds = [SystemKind::Singular, SystemKind::FixedPoint, SystemKind::Quotient, SystemKind::QuotientRelFixed];
    let unstable = Representation { trivial: k - 1, factors: vec![RepFactor::Sign { flips: vec![1] }] };
    let rows = [
        ("interior", &e, Representation::trivial(k)),
        ("stable", &whole, Representation::trivial(k)),
        ("unstable", &whole, unstable),
    ];
    let mut text = header("cells", "C2", &[("k", k.to_string()), ("format", format_name(format))]);
    if format == Format::Csv {
        text.push_str("cell,theory,degree,group\n");
    }
    for (cell, h, rep) in rows {
        let mut parts = Vec::new();
        for kind in &kinds {
            let groups = representation_cell_groups(&g, h, &rep, kind)?;
            let nonzero: Vec<(i64, String)> = (0..=k as i64)
                .filter(|&n| !groups.degree(n).is_zero())
                .map(|n| (n, groups.degree(n).render(Ring::Integers)))
                .collect();
            match format {
                Format::Csv => {
                    for (n, grp) in &nonzero {
                        let _ = writeln!(text, "{cell},{kind},{n},{grp}");
                    }
                }
                Format::Text => {
                    let desc = if nonzero.is_empty() {
                        "0".to_string()
                    } else {
                        nonzero.iter().map(|(n, grp)| format!("{grp} in degree {n}")).collect::<Vec<_>>().join(", ")
                    };
                    parts.push(format!("{kind}: {desc}"));
                }
            }
        }
        if format == Format::Text {
            let _ = writeln!(text, "{cell:<9} {}", parts.join(" | "));
        }
    }
    Ok(Report { text, ok: true })
}

fn smith(common: &Common, p: u64, stabilize: bool, seeds: usize, delta: f64) -> Result<Report> {
    let (fx, _, format) = load(common)?;
    let mut settings = vec![("p", p.to_string()), ("format", format_name(format))];
    let report = match (fx.gcw(), fx.manifold()) {
        (Some(x), _) => smith_report(x, p)?,
        (None, Some(m)) => {
            settings.extend([
                ("seeds", seeds.to_string()),
                ("delta", delta.to_string()),
                ("stabilize", stabilize.to_string()),
            ]);
            let run = morse_run(m, stabilize, seeds, delta)?;
            let data = run.data.with_context(|| run.note.unwrap_or_default())?;
            smith_report_morse(&data, p)?
        }
        (None, None) => unreachable!("fixtures carry a body"),
    };
    let mut text = header("smith", &fx.name, &settings);
    match format {
        Format::Csv => text.push_str(&report.to_csv()),
        Format::Text => {
            let _ = writeln!(text, "{report}");
        }
    }
    Ok(Report { text, ok: report.passes() })
}
