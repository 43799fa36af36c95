//! `digitc`: exact digital topological complexity from the command line.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use digitc::bundle::{
    certify_fibration, one_point_tests, spot_check_hlp, verify_fiber_bundle, verify_fibrational_substitute,
    BundleCandidate, FibrationData, FibrationHandle, FibrationKind, HlpVerdict, DEFAULT_NEIGHBORHOOD_CAP,
};
use digitc::docs::{load_image, load_map, HlpTestDocument, ImageDocument, MapDocument};
use digitc::genus::{cat_map, cat_space, genus_of_map, tc_map, tc_space, GenusOptions, GenusResult, SweepOptions};
use digitc::homotopy::{are_fhe, check_fhe_pair, is_contractible, Outcome};
use digitc::path_space::{PathAdjacency, PathOptions};
use digitc::relations::Relation;
use digitc::replay::check_report;
use digitc::report::{Budgets, InvariantReport, WitnessDoc};
use digitc::search::{search_counterexamples, Family, FamilyBounds, SearchOptions};
use digitc::{DigitalImage, DigitalMap, Error, HomotopyBudget};

#[derive(Parser, Debug)]
#[command(name = "digitc", version, about = "Exact TC, LS-category and Schwarz genus of digital images and maps")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Single-threaded run with deterministic witnesses.
    #[arg(long, global = true)]
    deterministic: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Largest path length swept (default: diameter + 2).
    #[arg(long, global = true)]
    max_m: Option<usize>,
    /// Largest number of blocks tried.
    #[arg(long, global = true, default_value_t = 4)]
    max_l: usize,
    /// Longest homotopy searched (default: |domain| · |codomain|).
    #[arg(long, global = true)]
    max_steps: Option<usize>,
    /// Embed replayable witnesses in reports.
    #[arg(long, global = true)]
    witness: bool,
    /// Replace the adjacency of input images by `cN`.
    #[arg(long, global = true)]
    adjacency: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = PathRel::Pointwise)]
    path_adjacency: PathRel,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Machine,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum PathRel {
    Pointwise,
    Window,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate an image document and describe the image.
    CheckImage {
        #[arg(long)]
        image: PathBuf,
    },
    /// Validate a map document and describe the map.
    CheckMap {
        #[arg(long)]
        map: PathBuf,
    },
    /// Topological complexity of an image.
    Tc {
        #[arg(long)]
        image: PathBuf,
    },
    /// Topological complexity of a map.
    TcMap {
        #[arg(long)]
        map: PathBuf,
    },
    /// LS-category of an image.
    Cat {
        #[arg(long)]
        image: PathBuf,
    },
    /// LS-category of a map.
    CatMap {
        #[arg(long)]
        map: PathBuf,
    },
    /// Schwarz genus of a map (covers of its codomain by sections).
    Genus {
        #[arg(long)]
        map: PathBuf,
    },
    /// Check the digital fiber bundle conditions.
    Bundle {
        #[arg(long)]
        map: PathBuf,
        /// Model fiber; defaults to the fiber over the first base point.
        #[arg(long)]
        fiber: Option<PathBuf>,
        /// Expected total image, checked against the map's domain.
        #[arg(long)]
        total: Option<PathBuf>,
        /// Expected base image, checked against the map's codomain.
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Fiber homotopy equivalence of two maps over a common base.
    Fhe {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        other: PathBuf,
        /// Candidate `h` from the first domain to the second.
        #[arg(long, requires = "k")]
        h: Option<PathBuf>,
        /// Candidate `k` from the second domain to the first.
        #[arg(long, requires = "h")]
        k: Option<PathBuf>,
    },
    /// Search for lifts of test homotopies through a map.
    HlpSpotCheck {
        #[arg(long)]
        map: PathBuf,
        /// JSON array of tests; defaults to every one-step test from a point.
        #[arg(long)]
        tests: Option<PathBuf>,
        /// Node cap per test.
        #[arg(long, default_value_t = 1_000_000)]
        max_nodes: usize,
    },
    /// Check whether `ghat` is a fibrational substitute of `g` through `k`.
    Substitute {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        ghat: PathBuf,
        #[arg(long)]
        k: PathBuf,
        /// How `ghat` is known to be a fibration.
        #[arg(long, value_enum)]
        ghat_kind: GhatKind,
        /// Second factor when `ghat` is a projection.
        #[arg(long)]
        right: Option<PathBuf>,
        /// Spot-check tests for `ghat` when no certificate applies.
        #[arg(long)]
        tests: Option<PathBuf>,
    },
    /// Look for violations of a relation over a family of small instances.
    SearchCounterexamples {
        #[arg(long)]
        family: String,
        #[arg(long)]
        relation: String,
        #[arg(long, default_value_t = 4)]
        max_domain: usize,
        #[arg(long, default_value_t = 2)]
        max_codomain: usize,
    },
    /// Print a named catalog image or map as a canonical document.
    Export {
        name: String,
    },
    /// Re-validate the witnesses of a report file (one report per line).
    ReplayWitness {
        #[arg(long)]
        report: PathBuf,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum GhatKind {
    Constant,
    Projection,
    SpotChecked,
}

/// What a command produced: reports plus whether a budget stopped it.
struct Outputs {
    reports: Vec<InvariantReport>,
    budget_hit: bool,
}

impl Outputs {
    fn one(rep: InvariantReport, budget_hit: bool) -> Self {
        Outputs {
            reports: vec![rep],
            budget_hit,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.global.deterministic {
        std::env::set_var("RAYON_NUM_THREADS", "1");
    }
    match run(&cli) {
        Ok(out) => {
            for rep in &out.reports {
                match cli.global.format {
                    Format::Machine => println!("{}", rep.to_machine()),
                    Format::Text => print!("{}", rep.to_text()),
                }
            }
            if out.budget_hit {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_budget() { 3 } else { 2 })
        }
    }
}

impl Global {
    fn budgets(&self) -> Budgets {
        Budgets {
            max_m: self.max_m,
            max_l: Some(self.max_l),
            max_steps: self.max_steps,
            ..Default::default()
        }
    }

    fn homotopy(&self) -> HomotopyBudget {
        HomotopyBudget {
            max_steps: self.max_steps,
            ..Default::default()
        }
    }

    fn genus(&self) -> GenusOptions {
        GenusOptions {
            max_l: self.max_l,
            homotopy: self.homotopy(),
            ..Default::default()
        }
    }

    fn sweep(&self) -> SweepOptions {
        SweepOptions {
            max_m: self.max_m,
            paths: PathOptions {
                relation: match self.path_adjacency {
                    PathRel::Pointwise => PathAdjacency::Pointwise,
                    PathRel::Window => PathAdjacency::Window,
                },
                ..Default::default()
            },
            genus: self.genus(),
            ..Default::default()
        }
    }

    fn image(&self, path: &Path) -> Result<Arc<DigitalImage>, Error> {
        let img = load_image(path)?;
        let img = match &self.adjacency {
            Some(a) => {
                let spec = digitc::docs::AdjacencyDoc::Named(a.clone()).to_spec()?;
                img.with_spec(spec)?
            }
            None => img,
        };
        Ok(Arc::new(img))
    }
}

fn map(path: &Path) -> Result<DigitalMap, Error> {
    load_map(path)
}

fn stem(path: &Path) -> Option<String> {
    path.file_stem().map(|s| s.to_string_lossy().into_owned())
}

/// Report of a minimal-cover computation; a budget was hit when the lower
/// bound is unproven.
fn genus_report(name: &str, subject: &Path, r: &GenusResult, g: &Global, budgets: Budgets) -> Outputs {
    let rep = InvariantReport::from_genus(name, r, budgets, g.witness).with_subject(stem(subject));
    Outputs::one(rep, !r.exhausted || !r.stabilized)
}

fn run(cli: &Cli) -> Result<Outputs, Error> {
    let g = &cli.global;
    match &cli.command {
        Command::Export { name } => {
            let doc = if let Some(img) = digitc::catalog::image_by_name(name) {
                ImageDocument::from_image(&img, Some(name.clone())).to_json()
            } else if let Some(map) = digitc::catalog::map_by_name(name) {
                MapDocument::from_map(&map, Some(name.clone())).to_json()
            } else {
                return Err(Error::Malformed(format!("no catalog entry named {name:?}")));
            };
            print!("{doc}");
            Ok(Outputs {
                reports: Vec::new(),
                budget_hit: false,
            })
        }
        Command::CheckImage { image } => {
            let img = g.image(image)?;
            let contractible = match is_contractible(&img, g.homotopy())? {
                Outcome::Found(t) => json!(t.steps()),
                Outcome::Exhausted => json!(false),
                Outcome::BudgetHit => json!(null),
            };
            let mut rep = InvariantReport::new("check-image", g.budgets()).with_subject(stem(image));
            rep.verdict = Some(true);
            rep.exhausted = true;
            rep.stabilized = true;
            rep.details = Some(json!({
                "points": img.len(),
                "edges": img.edge_count(),
                "adjacency": img.spec().to_string(),
                "components": img.components().len(),
                "diameter": img.diameter(),
                "contractible_in_steps": contractible,
            }));
            Ok(Outputs::one(rep, false))
        }
        Command::CheckMap { map: path } => {
            let f = map(path)?;
            let mut rep = InvariantReport::new("check-map", g.budgets()).with_subject(stem(path));
            rep.verdict = Some(f.is_continuous());
            rep.exhausted = true;
            rep.stabilized = true;
            rep.details = Some(json!({
                "continuous": f.is_continuous(),
                "surjective": f.is_surjective(),
                "injective": f.is_injective(),
                "isomorphism": f.is_isomorphism(),
                "constant": f.is_constant(),
            }));
            Ok(Outputs::one(rep, false))
        }
        Command::Tc { image } => {
            let img = g.image(image)?;
            let r = tc_space(&img, &g.sweep())?;
            let budgets = Budgets {
                max_m: Some(g.max_m.unwrap_or(img.diameter().unwrap_or(0) + 2)),
                ..g.budgets()
            };
            Ok(genus_report("tc", image, &r, g, budgets))
        }
        Command::TcMap { map: path } => {
            let f = map(path)?;
            let r = tc_map(&f, &g.sweep())?;
            let budgets = Budgets {
                max_m: Some(g.max_m.unwrap_or(f.domain().diameter().unwrap_or(0) + 2)),
                ..g.budgets()
            };
            Ok(genus_report("tc-map", path, &r, g, budgets))
        }
        Command::Cat { image } => {
            let img = g.image(image)?;
            let r = cat_space(&img, &g.genus())?;
            let budgets = Budgets {
                max_steps: Some(g.homotopy().steps_for(&img, &img)),
                ..g.budgets()
            };
            Ok(genus_report("cat", image, &r, g, budgets))
        }
        Command::CatMap { map: path } => {
            let f = map(path)?;
            let r = cat_map(&f, &g.genus())?;
            let budgets = Budgets {
                max_steps: Some(g.homotopy().steps_for(f.domain(), f.codomain())),
                ..g.budgets()
            };
            Ok(genus_report("cat-map", path, &r, g, budgets))
        }
        Command::Genus { map: path } => {
            let f = map(path)?;
            let r = genus_of_map(&f, &g.genus())?;
            Ok(genus_report("genus", path, &r, g, g.budgets()))
        }
        Command::Bundle {
            map: path,
            fiber,
            total,
            base,
        } => bundle(g, path, fiber.as_deref(), total.as_deref(), base.as_deref()),
        Command::Fhe { map: p1, other, h, k } => fhe(g, p1, other, h.as_deref(), k.as_deref()),
        Command::HlpSpotCheck {
            map: path,
            tests,
            max_nodes,
        } => hlp(g, path, tests.as_deref(), *max_nodes),
        Command::Substitute {
            map: path,
            ghat,
            k,
            ghat_kind,
            right,
            tests,
        } => substitute(g, path, ghat, k, *ghat_kind, right.as_deref(), tests.as_deref()),
        Command::SearchCounterexamples {
            family,
            relation,
            max_domain,
            max_codomain,
        } => search(g, family, relation, *max_domain, *max_codomain),
        Command::ReplayWitness { report } => replay(g, report),
    }
}

fn bundle(g: &Global, path: &Path, fiber: Option<&Path>, total: Option<&Path>, base: Option<&Path>) -> Result<Outputs, Error> {
    let f = map(path)?;
    if let Some(t) = total {
        if **f.domain() != *g.image(t)? {
            return Err(Error::ImageMismatch("the total image differs from the map's domain".into()));
        }
    }
    if let Some(b) = base {
        if **f.codomain() != *g.image(b)? {
            return Err(Error::ImageMismatch("the base image differs from the map's codomain".into()));
        }
    }
    let mut notes = Vec::new();
    let candidate = match fiber {
        Some(t) => BundleCandidate::new(f, g.image(t)?)?,
        None => {
            notes.push("model fiber proposed as the fiber over the first base point".to_string());
            BundleCandidate::with_proposed_fiber(f)?
        }
    };
    let mut rep = InvariantReport::new("bundle", Budgets {
        search_nodes: Some(DEFAULT_NEIGHBORHOOD_CAP),
        ..g.budgets()
    })
    .with_subject(stem(path));
    rep.exhausted = true;
    rep.stabilized = true;
    rep.notes = notes;
    match verify_fiber_bundle(&candidate, DEFAULT_NEIGHBORHOOD_CAP)? {
        Ok(w) => {
            rep.verdict = Some(true);
            let hoods: Vec<_> = w.trivializations.iter().map(|t| t.neighborhood.clone()).collect();
            rep.details = Some(json!({ "neighborhoods": hoods }));
            rep.witness = Some(WitnessDoc::bundle(&candidate, &w));
        }
        Err(failure) => {
            rep.verdict = Some(false);
            rep.notes.push(failure.to_string());
        }
    }
    Ok(Outputs::one(rep, false))
}

fn fhe(g: &Global, p1: &Path, p2: &Path, h: Option<&Path>, k: Option<&Path>) -> Result<Outputs, Error> {
    let (g1, g2) = (map(p1)?, map(p2)?);
    let outcome = match (h, k) {
        (Some(h), Some(k)) => check_fhe_pair(&g1, &g2, &map(h)?, &map(k)?, g.homotopy())?,
        _ => are_fhe(&g1, &g2, g.homotopy())?,
    };
    let mut rep = InvariantReport::new("fhe", g.budgets()).with_subject(stem(p1));
    let budget_hit = matches!(outcome, Outcome::BudgetHit);
    rep.exhausted = !budget_hit;
    rep.stabilized = true;
    rep.verdict = match &outcome {
        Outcome::Found(_) => Some(true),
        Outcome::Exhausted => Some(false),
        Outcome::BudgetHit => None,
    };
    if let Outcome::Found(w) = &outcome {
        rep.details = Some(json!({ "h": w.h.table(), "k": w.k.table() }));
        rep.witness = Some(WitnessDoc::fhe(&g1, &g2, w));
    }
    Ok(Outputs::one(rep, budget_hit))
}

fn load_tests(f: &DigitalMap, tests: Option<&Path>) -> Result<Vec<digitc::bundle::HlpTest>, Error> {
    match tests {
        Some(p) => HlpTestDocument::load_list(p)?.iter().map(|t| t.to_test(f)).collect(),
        None => Ok(one_point_tests(f)),
    }
}

fn hlp(g: &Global, path: &Path, tests: Option<&Path>, max_nodes: usize) -> Result<Outputs, Error> {
    let f = map(path)?;
    let tests = load_tests(&f, tests)?;
    let report = spot_check_hlp(&f, &tests, max_nodes)?;
    let budgets = Budgets {
        search_nodes: Some(max_nodes),
        ..g.budgets()
    };
    let mut reports = Vec::new();
    let mut budget_hit = false;
    for (i, (test, verdict)) in tests.iter().zip(&report.verdicts).enumerate() {
        let mut rep = InvariantReport::new("hlp-spot-check", budgets.clone()).with_subject(stem(path));
        rep.stabilized = true;
        rep.exhausted = !matches!(verdict, HlpVerdict::BudgetHit);
        let label = match verdict {
            HlpVerdict::Lifted(lift) => {
                rep.verdict = Some(true);
                rep.witness = Some(WitnessDoc::hlp_lift(&f, test, lift));
                "lifted".to_string()
            }
            HlpVerdict::NotLiftable => {
                rep.verdict = Some(false);
                rep.witness = Some(WitnessDoc::hlp_refutation(&f, test));
                rep.notes.push("no lift exists: the map is not a digital fibration".into());
                "not-liftable".to_string()
            }
            HlpVerdict::Malformed(why) => {
                rep.notes.push(format!("malformed test: {why}"));
                "malformed".to_string()
            }
            HlpVerdict::BudgetHit => {
                budget_hit = true;
                "budget-hit".to_string()
            }
        };
        rep.details = Some(json!({ "test": i, "outcome": label }));
        reports.push(rep);
    }
    Ok(Outputs { reports, budget_hit })
}

fn substitute(
    g: &Global,
    path: &Path,
    ghat_path: &Path,
    k: &Path,
    kind: GhatKind,
    right: Option<&Path>,
    tests: Option<&Path>,
) -> Result<Outputs, Error> {
    let (f, ghat, k) = (map(path)?, map(ghat_path)?, map(k)?);
    let handle = match kind {
        GhatKind::Constant => certify_fibration(FibrationKind::Constant, FibrationData::Map(ghat))?,
        GhatKind::Projection => {
            let right = right.ok_or_else(|| Error::Precondition("a projection needs --right".into()))?;
            let data = FibrationData::Projection {
                left: ghat.codomain().clone(),
                right: g.image(right)?,
                map: ghat,
            };
            certify_fibration(FibrationKind::Projection, data)?
        }
        GhatKind::SpotChecked => {
            let tests = load_tests(&ghat, tests)?;
            let report = spot_check_hlp(&ghat, &tests, 1_000_000)?;
            let mut handle = FibrationHandle::unverified(ghat);
            handle.record_spot_check(&report);
            handle
        }
    };
    let verdict = verify_fibrational_substitute(&f, &handle, &k, g.homotopy())?;
    let mut rep = InvariantReport::new("substitute", g.budgets()).with_subject(stem(path));
    rep.verdict = Some(verdict);
    rep.exhausted = true;
    rep.stabilized = true;
    rep.notes.push(format!("substitute provenance: {}", handle.provenance()));
    Ok(Outputs::one(rep, false))
}

fn search(g: &Global, family: &str, relation: &str, max_domain: usize, max_codomain: usize) -> Result<Outputs, Error> {
    let family: Family = family.parse()?;
    let relation: Relation = relation.parse()?;
    let opts = SearchOptions {
        sweep: g.sweep(),
        homotopy: g.homotopy(),
        threads: g.deterministic.then_some(1),
    };
    let bounds = FamilyBounds {
        max_domain,
        max_codomain,
    };
    let r = search_counterexamples(family, bounds, relation, &opts)?;
    let mut rep = InvariantReport::new("search-counterexamples", g.budgets());
    rep.subject = Some(format!("{family} / {relation}"));
    rep.verdict = Some(!r.violations.is_empty());
    rep.notes.push(format!(
        "verdict is whether a counterexample was found among {} instances",
        r.checked
    ));
    rep.exhausted = r.inconclusive.is_empty();
    rep.stabilized = true;
    let minimal: Vec<&str> = r.minimal().iter().map(|v| v.instance.as_str()).collect();
    rep.details = Some(json!({
        "statement": relation.statement(),
        "bounds": bounds,
        "checked": r.checked,
        "holds": r.holds,
        "not_applicable": r.not_applicable,
        "violations": r.violations,
        "minimal": minimal,
        "inconclusive": r.inconclusive,
    }));
    Ok(Outputs::one(rep, !r.inconclusive.is_empty()))
}

fn replay(g: &Global, path: &Path) -> Result<Outputs, Error> {
    let text = fs::read_to_string(path).map_err(|e| Error::Malformed(format!("cannot read {}: {e}", path.display())))?;
    let mut problems = Vec::new();
    let mut count = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let rep = InvariantReport::parse(line)?;
        count += 1;
        for p in check_report(&rep)? {
            problems.push(format!("report {count} ({}): {p}", rep.invariant));
        }
    }
    if count == 0 {
        return Err(Error::Malformed("no reports in file".into()));
    }
    let mut rep = InvariantReport::new("replay-witness", g.budgets()).with_subject(stem(path));
    rep.verdict = Some(problems.is_empty());
    rep.exhausted = true;
    rep.stabilized = true;
    rep.details = Some(json!({ "reports": count }));
    rep.notes = problems;
    Ok(Outputs::one(rep, false))
}
