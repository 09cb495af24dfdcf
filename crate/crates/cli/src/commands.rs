use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use stabset_core::dynamics::{
    attracting_set, backward_chain, example21_backward_search, example21_classify, example21_truncate, four_sets,
    greatest_stabilized_subset, FiniteSelfMap, Z2Point,
};
use stabset_core::freegroup::{rank_chain, stab_atrac_report, FreeEndo, ReducedWord, StabVerdict};
use stabset_core::hilbert::{
    basis_preimages, complete_weighted_sum, divergence_candidates, e0_preimage_depth, e0_witness, kernel_witness,
    nonsurjectivity_evidence, norm_bound_check, verify_shift_relation, TruncationWindow, NORM_TOLERANCE,
};
use stabset_core::interval::{
    atrac_iterates, backward_chain_point, fixed_points, orbit_return, separation_search, PwlMap,
};
use stabset_core::linear::{chain_report, decomposition_report, image_basis, stable_subspace, RationalMatrix};
use stabset_core::monoid::{
    desubstitute_branches, directive_path_exists, episturmian_generate, finite_monoid_sets, kolakoski_report,
    maximality_exhaustive, parse_directive, smooth_check, MonoidSystem,
};
use stabset_core::rational::{parse_q, qi, Q};
use stabset_core::words::{
    erasing_depth_check, expand_fixed_point, finite_fixed_word, fixed_point_specs, membership_finite, periodic_letters,
    single_letter_letters, universe_sets, FixedPointCase, Substitution,
};
use stabset_core::{Error, Result};

use crate::{
    campaign, read_file, Answer, Cli, Command, FmapCommand, FreegroupCommand, HilbertCheck, HilbertCommand,
    IntervalCommand, LinearCommand, MonoidCommand, SubstCommand,
};

/// Nodes allowed in an episturmian desubstitution tree.
const DESUB_NODE_CAP: usize = 200_000;
/// Forward steps allowed when deciding whether an interval orbit returns.
const ORBIT_STEPS: usize = 1_000;
/// Divergence evidence: ladder of truncation sizes and the norm² to exceed.
const DIVERGENCE_LADDER: [u64; 4] = [10, 100, 1_000, 10_000];
const DIVERGENCE_THRESHOLD: f64 = 1e3;
const NORM_SAMPLES: usize = 200;

pub(crate) fn dispatch(cli: &Cli) -> Result<Answer> {
    match &cli.command {
        Command::Fmap(c) => fmap(cli, c),
        Command::Linear(LinearCommand::Analyze { file }) => linear(&read_file(file)?),
        Command::Hilbert(HilbertCommand::Verify { kmax, nmax, check }) => hilbert(cli, *kmax, *nmax, *check),
        Command::Subst(c) => subst(cli, c),
        Command::Monoid(c) => monoid(cli, c),
        Command::Freegroup(c) => freegroup(cli, c),
        Command::Interval(c) => interval(cli, c),
        Command::Campaign(args) => {
            let report = campaign(cli.numeric_seed()?, args.sizes);
            let passed = report.passed;
            Ok(Answer::checked(
                serde_json::to_value(report).expect("serializable"),
                passed,
            ))
        }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn fmap(cli: &Cli, c: &FmapCommand) -> Result<Answer> {
    match c {
        FmapCommand::Analyze { file } => {
            let f = FiniteSelfMap::from_json(&read_file(file)?)?;
            let sets = four_sets(&f);
            let pruned = greatest_stabilized_subset(&f);
            let iterated = attracting_set(&f);
            let chain = sets.chain_holds();
            let agree = pruned == iterated;
            Ok(Answer::checked(
                json!({
                    "size": f.size(),
                    "sets": sets,
                    "chain_holds": chain,
                    "stab_equals_atrac": agree,
                    "method": "exact",
                }),
                chain && agree,
            ))
        }
        FmapCommand::Chain { file, x } => {
            let f = FiniteSelfMap::from_json(&read_file(file)?)?;
            let depth = cli.depth_or(10)?;
            let chain = backward_chain(&f, *x, depth)?;
            Ok(Answer::ok(json!({ "x": x, "depth": depth, "chain": chain })))
        }
        FmapCommand::Example21 { n, m } => {
            let p = Z2Point::new(*n, *m)?;
            let depth = cli.depth_or(100)?;
            let report = example21_classify(p)?;
            let search = example21_backward_search(p, depth)?;
            // Points off the ray only have chains up to the top of their column.
            let expected = report.in_atrac || depth as i64 <= p.n - 1 - p.m;
            let consistent = search.is_some() == expected;
            Ok(Answer::checked(
                json!({
                    "classification": report,
                    "depth": depth,
                    "depth_limited_chain": search,
                    "consistent": consistent,
                }),
                consistent,
            ))
        }
        FmapCommand::Truncate { window } => {
            let t = example21_truncate(*window)?;
            let sets = four_sets(&t.map);
            let name = |s: &BTreeSet<usize>| s.iter().map(|&i| t.points[i]).collect::<Vec<_>>();
            Ok(Answer::checked(
                json!({
                    "window": window,
                    "points": t.points.len(),
                    "fix": name(&sets.fix),
                    "orb": name(&sets.orb),
                    "stab": name(&sets.stab),
                    "atrac": name(&sets.atrac),
                }),
                sets.chain_holds(),
            ))
        }
    }
}

fn linear(text: &str) -> Result<Answer> {
    let m = RationalMatrix::from_json(text)?;
    let chain = chain_report(&m)?;
    let split = decomposition_report(&m)?;
    let stable = stable_subspace(&m)?;
    let d = m.rows();
    let power_image = image_basis(&m.pow(d)?);
    let agree = stable == power_image;
    let passed = agree && split.passes && chain.stab_index <= d;
    Ok(Answer::checked(
        json!({
            "chain": chain,
            "decomposition": split,
            "stable_subspace": stable,
            "stable_equals_image_of_power": agree,
            "method": "exact",
        }),
        passed,
    ))
}

/// `λ_1 = 1, λ_k = −k²`: weighted sum zero.
fn kernel_coeffs(k: u64) -> Vec<(u64, Q)> {
    vec![(1, qi(1)), (k, qi(-((k * k) as i64)))]
}

/// `λ_k = 1` and `λ_1` completing the weighted sum to one.
fn e0_coeffs(k: u64) -> Vec<(u64, Q)> {
    let partial = vec![(k, qi(1))];
    let last = complete_weighted_sum(&partial, 1, &qi(1));
    vec![(1, last), (k, qi(1))]
}

fn hilbert(cli: &Cli, kmax: u64, nmax: u64, check: HilbertCheck) -> Result<Answer> {
    let w = TruncationWindow::new(kmax, nmax)?;
    let wants = |c: HilbertCheck| check == HilbertCheck::All || check == c;
    let mut out = serde_json::Map::new();
    let mut passed = true;
    out.insert("window".into(), json!({ "k_max": kmax, "n_max": nmax }));
    if wants(HilbertCheck::Shift) {
        let mut pairs = 0;
        let mut checked = 0;
        for k in 2..=kmax {
            for j in 2..=k {
                checked += verify_shift_relation(k, j, &w)?.checked;
                pairs += 1;
            }
        }
        out.insert(
            "shift".into(),
            json!({ "pairs": pairs, "coordinates": checked, "method": "exact" }),
        );
    }
    if wants(HilbertCheck::Kernel) {
        let mut witnesses = 0;
        for k in 2..=kmax.min(26) {
            kernel_witness(&kernel_coeffs(k), &qi(0), &w)?;
            e0_witness(&e0_coeffs(k), &qi(0), &w)?;
            witnesses += 2;
        }
        out.insert("kernel".into(), json!({ "witnesses": witnesses, "method": "exact" }));
    }
    if wants(HilbertCheck::Preimage) {
        let mut depths = Vec::new();
        for m in 2..=kmax.min(6).min(nmax) {
            let r = e0_preimage_depth(m, &[(m, qi((m * m) as i64))], &qi(1), &w)?;
            depths.push(json!({ "m": m, "applications": r.applications, "checked": r.checked }));
        }
        let basis = basis_preimages(&w)?;
        out.insert(
            "preimage".into(),
            json!({ "depths": depths, "basis": basis, "method": "exact" }),
        );
    }
    if wants(HilbertCheck::Norm) {
        let mut rng = ChaCha8Rng::seed_from_u64(cli.numeric_seed()?);
        let tolerance = cli.tolerance.unwrap_or(NORM_TOLERANCE);
        let r = norm_bound_check(NORM_SAMPLES, &w, tolerance, &mut rng)?;
        passed &= r.violations == 0;
        out.insert(
            "norm".into(),
            json!({ "report": r, "tolerance": tolerance, "method": "floating" }),
        );
    }
    if wants(HilbertCheck::Diverge) {
        let r = nonsurjectivity_evidence(2, &DIVERGENCE_LADDER, &divergence_candidates(2), DIVERGENCE_THRESHOLD)?;
        passed &= r.passes;
        out.insert("diverge".into(), json!({ "report": r, "method": "depth-limited" }));
    }
    Ok(Answer::checked(Value::Object(out), passed))
}

fn load_subst(file: &std::path::Path) -> Result<Substitution> {
    Substitution::parse(&read_file(file)?)
}

fn subst(cli: &Cli, c: &SubstCommand) -> Result<Answer> {
    match c {
        SubstCommand::Analyze { file } => {
            let phi = load_subst(file)?;
            let spec = fixed_point_specs(&phi);
            let letters = |ls: Vec<u8>| phi.format(&ls);
            let mut out = json!({
                "substitution": phi.to_dsl(),
                "non_erasing": phi.is_non_erasing(),
                "mortality": phi.mortality(),
                "fixed_points": spec.to_json(&phi),
                "periodic_letters": letters(periodic_letters(&phi)),
                "single_letter_images": letters(single_letter_letters(&phi)),
            });
            let mut passed = true;
            if phi.is_non_erasing() {
                let len = cli.length_or(4)?;
                let sets = universe_sets(&phi, len)?;
                let equal = sets.orb == sets.stab && sets.stab == sets.atrac;
                passed &= equal;
                let show = |s: &BTreeSet<Vec<u8>>| s.iter().map(|w| phi.format(w)).collect::<Vec<_>>();
                out["finite_words"] = json!({
                    "max_length": len,
                    "orb": show(&sets.orb),
                    "stab": show(&sets.stab),
                    "atrac": show(&sets.atrac),
                    "all_equal": equal,
                    "method": "exact",
                });
            }
            Ok(Answer::checked(out, passed))
        }
        SubstCommand::Fixpoint { file } => {
            let phi = load_subst(file)?;
            let seed = cli
                .seed
                .as_deref()
                .ok_or_else(|| Error::Input("fixpoint needs --seed LETTER".into()))?;
            let mut chars = seed.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(ch), None) => phi.letter(ch)?,
                _ => return Err(Error::Input(format!("--seed must be one letter, got {seed:?}"))),
            };
            let len = cli.length_or(32)?;
            let analysis = fixed_point_specs(&phi);
            let Some(spec) = analysis.specs.iter().find(|s| s.seed == letter) else {
                return Ok(Answer::ok(json!({ "seed": seed, "spec": null, "fixed_point": null })));
            };
            let word = match spec.case {
                FixedPointCase::Infinite => expand_fixed_point(&phi, spec, len)?,
                FixedPointCase::Finite => finite_fixed_word(&phi, spec)?,
            };
            // φ^r fixes the finite word, and maps a prefix of the infinite one
            // to a word compatible with it.
            let verified = match spec.case {
                FixedPointCase::Finite => phi.apply_n(&word, spec.power) == word,
                FixedPointCase::Infinite => {
                    let image = phi.apply_n_prefix(&word, spec.power, word.len());
                    word.starts_with(&image)
                }
            };
            Ok(Answer::checked(
                json!({
                    "seed": seed,
                    "spec": spec.to_json(&phi),
                    "fixed_point": phi.format(&word),
                    "length": word.len(),
                    "method": if spec.case == FixedPointCase::Finite { "exact" } else { "prefix" },
                    "verified": verified,
                }),
                verified,
            ))
        }
        SubstCommand::Member { file, word } => {
            let phi = load_subst(file)?;
            let w = phi.word(word)?;
            let exact = membership_finite(&phi, &w);
            let mut out = json!({ "word": word, "membership": exact });
            let mut passed = true;
            if !phi.is_non_erasing() {
                let depth = cli.depth_or(50)?;
                let check = erasing_depth_check(&phi, &w, depth as u64);
                passed &= !check.contradiction;
                out["depth_check"] = to_value(&check);
            }
            Ok(Answer::checked(out, passed))
        }
    }
}

fn monoid(cli: &Cli, c: &MonoidCommand) -> Result<Answer> {
    match c {
        MonoidCommand::Finite { file } => {
            let sys = MonoidSystem::from_json(&read_file(file)?)?;
            let sets = finite_monoid_sets(&sys);
            let mut out = json!({ "size": sys.size, "maps": sys.names, "sets": sets, "method": "exact" });
            let mut passed = sets.equal;
            if sys.size <= 20 {
                let max = maximality_exhaustive(&sys)?;
                passed &= max.passes();
                out["maximality"] = to_value(&max);
            }
            Ok(Answer::checked(out, passed))
        }
        MonoidCommand::Epi { directive, alphabet } => {
            let alphabet: Vec<char> = match alphabet {
                Some(a) => a.chars().collect(),
                None => {
                    let letters: BTreeSet<char> =
                        directive.split_whitespace().filter_map(|t| t.chars().nth(1)).collect();
                    letters.into_iter().collect()
                }
            };
            let tokens = parse_directive(directive, &alphabet)?;
            let len = cli.length_or(32)?;
            let report = episturmian_generate(&tokens, &alphabet, len)?;
            let word: Vec<u8> = report
                .prefix
                .chars()
                .map(|ch| alphabet.iter().position(|&a| a == ch).expect("generated letters") as u8)
                .collect();
            let recovered = directive_path_exists(&tokens, &alphabet, &word);
            let depth = cli.depth_or(tokens.len())?;
            let tree = desubstitute_branches(&alphabet, &word, depth, DESUB_NODE_CAP);
            Ok(Answer::checked(
                json!({
                    "generation": report,
                    "directive_recovered": recovered,
                    "desubstitution": {
                        "depth": tree.depth,
                        "depth_reached": tree.depth_reached,
                        "nodes": tree.nodes,
                        "truncated": tree.truncated,
                        "in_stab_at_precision": tree.in_stab_at_precision(),
                    },
                    "method": if report.complete { "prefix" } else { "depth-limited" },
                }),
                recovered,
            ))
        }
        MonoidCommand::Kolakoski { against } => {
            let len = cli.length_or(1_000)?;
            let r = kolakoski_report(len, Some(against))?;
            let passed = r.self_mismatch.is_none();
            Ok(Answer::checked(to_value(&r), passed))
        }
        MonoidCommand::Smooth { word, sigma } => {
            let digits = |s: &str| -> Result<Vec<usize>> {
                s.chars()
                    .map(|c| {
                        c.to_digit(10)
                            .map(|d| d as usize)
                            .ok_or_else(|| Error::Input(format!("not a digit: {c:?}")))
                    })
                    .collect()
            };
            let w = digits(word)?;
            let sigma = digits(sigma)?;
            let depth = cli.depth_or(5)?;
            let r = smooth_check(&w, &sigma, depth)?;
            Ok(Answer::ok(
                json!({ "word": word, "report": r, "method": "depth-limited" }),
            ))
        }
    }
}

fn load_endo(file: &std::path::Path) -> Result<FreeEndo> {
    FreeEndo::from_json(&read_file(file)?)
}

fn freegroup(cli: &Cli, c: &FreegroupCommand) -> Result<Answer> {
    match c {
        FreegroupCommand::Rankchain { file, n } => {
            let phi = load_endo(file)?;
            if *n == 0 {
                return Err(Error::Input("--n must be positive".into()));
            }
            let r = rank_chain(&phi, *n);
            let passed = r.ranks_non_increasing && r.hopfian_consistent;
            Ok(Answer::checked(to_value(&r), passed))
        }
        FreegroupCommand::Member { file, word } => {
            let phi = load_endo(file)?;
            let w = ReducedWord::parse(word, phi.rank())?;
            let depth = cli.depth_or(4)?;
            let r = stab_atrac_report(&phi, &w, depth)?;
            let method = match r.verdict {
                StabVerdict::DepthStamped { .. } => "depth-limited",
                _ => "exact",
            };
            Ok(Answer::ok(json!({ "report": r, "method": method })))
        }
    }
}

fn load_pwl(file: &std::path::Path) -> Result<PwlMap> {
    PwlMap::from_json(&read_file(file)?)
}

fn interval(cli: &Cli, c: &IntervalCommand) -> Result<Answer> {
    match c {
        IntervalCommand::Atrac { file, n } => {
            let f = load_pwl(file)?;
            let iterates = atrac_iterates(&f, *n)?;
            Ok(Answer::ok(json!({
                "iterates": iterates,
                "fixed_points": fixed_points(&f),
                "method": "exact",
            })))
        }
        IntervalCommand::Chain { file, x } => {
            let f = load_pwl(file)?;
            let x = parse_q(x)?;
            let depth = cli.depth_or(10)?;
            let chain = backward_chain_point(&f, &x, depth)?;
            let orbit = orbit_return(&f, &x, ORBIT_STEPS)?;
            Ok(Answer::ok(json!({ "chain": chain, "orbit": orbit, "method": "exact" })))
        }
        IntervalCommand::Separate { file, den } => {
            let f = load_pwl(file)?;
            let depth = cli.depth_or(12)?;
            let s = separation_search(&f, depth, *den, ORBIT_STEPS)?;
            let found = s.witness.is_some();
            Ok(Answer::checked(
                json!({ "search": s, "witness_found": found }),
                s.all_chained,
            ))
        }
    }
}
