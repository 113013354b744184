//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use ahtower_core::comparison::brute_force_max_trivial;
use ahtower_core::euler::{max_transversal_size, sdr_exists};
use ahtower_core::tower::explicit::{ExplicitTower, EXPLICIT_COORD_LIMIT};
use ahtower_core::tower::r_enclosure_at;
use ahtower_core::{
    max_trivial_multiple, Certificate, CoordinateAllocator, DisjointFamilySummary, FormalProjection, IndexSet,
    KSequence, Tower, TowerParams,
};
use anyhow::{bail, ensure, Context, Result};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Criterion<'a> = Box<dyn Fn() -> Result<String> + 'a>;

const BIN: &str = env!("CARGO_BIN_EXE_ahtower");

fn within(start: Instant, limit: Duration) -> Result<Duration> {
    let elapsed = start.elapsed();
    ensure!(elapsed < limit, "took {elapsed:.1?}, limit {limit:?}");
    Ok(elapsed)
}

fn run_cli(args: &[&str]) -> Result<(Vec<u8>, i32)> {
    let out = Command::new(BIN).args(args).output().context("spawning the CLI")?;
    Ok((out.stdout, out.status.code().unwrap_or(-1)))
}

fn random_family(rng: &mut ChaCha8Rng) -> FormalProjection {
    let mut q = FormalProjection::empty();
    for _ in 0..rng.gen_range(1..=8) {
        let size = rng.gen_range(0..=4);
        let mut coords: Vec<u64> = (0..10).collect();
        coords.shuffle(rng);
        coords.truncate(size);
        q.add_term(IndexSet::new(coords).unwrap(), rng.gen_range(1..=3));
    }
    q
}

fn oracle_triangle() -> Result<String> {
    const FAMILIES: usize = 600;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut with_sdr = 0;
    for case in 0..FAMILIES {
        let q = random_family(&mut rng);
        let (max, witness) = max_trivial_multiple(&q);
        let brute = brute_force_max_trivial(&q)?;
        ensure!(max == brute, "case {case}: matching {max}, exhaustive {brute} on {q:?}");
        ensure!(
            witness.is_consistent() && witness.deficiency == max as i64,
            "case {case}: bad witness"
        );

        let matching_size = q.rank() - max;
        let transversal = max_transversal_size(&q)? as u64;
        ensure!(
            transversal == matching_size,
            "case {case}: polynomial {transversal}, matching {matching_size}"
        );

        // the polynomial SDR test only takes nonempty sets
        let (family, trivial): (Vec<IndexSet>, Vec<IndexSet>) = q
            .terms()
            .flat_map(|(s, mult)| std::iter::repeat_n(s.clone(), mult as usize))
            .partition(|s| !s.is_trivial());
        if !trivial.is_empty() {
            ensure!(
                sdr_exists(&q.terms().map(|(s, _)| s.clone()).collect::<Vec<_>>()).is_err(),
                "case {case}"
            );
        }
        let sdr = sdr_exists(&family)?;
        let saturated = max == trivial.len() as u64;
        ensure!(
            sdr == saturated,
            "case {case}: SDR {sdr} but max trivial multiple {max}"
        );
        with_sdr += usize::from(sdr);
    }
    let elapsed = within(start, Duration::from_secs(60))?;
    Ok(format!(
        "{FAMILIES} families agree, {with_sdr} with an SDR ({elapsed:.1?})"
    ))
}

fn sharpness() -> Result<String> {
    let start = Instant::now();
    let tower = Tower::new(TowerParams::default())?;
    let explicit = ExplicitTower::new(&tower, 4, EXPLICIT_COORD_LIMIT)?;
    let mut cases = 0;
    for i in 1..=4 {
        for j in 1..=i {
            let f = explicit.f(i, j)?;
            let compressed = tower.build_f(i, j)?.expand(&mut CoordinateAllocator::new())?;
            for n in 1..=4u64 {
                let expected = tower.a_count(i, j, n)?;
                for (route, p) in [("explicit", &f), ("normal form", &compressed)] {
                    let (found, _) = max_trivial_multiple(&p.scale(n));
                    ensure!(
                        BigUint::from(found) == expected,
                        "{route} f_({i},{j}) with n = {n}: engine {found}, a_count {expected}"
                    );
                }
                let (doubled, _) = max_trivial_multiple(&f.scale(2 * n));
                ensure!(
                    BigUint::from(doubled) == tower.b_count(i, j, n)?,
                    "b mismatch at ({i},{j}), n = {n}"
                );
                cases += 1;
            }
        }
    }
    let elapsed = within(start, Duration::from_secs(300))?;
    Ok(format!("{cases} (i,j,n) triples exact on both routes ({elapsed:.1?})"))
}

fn identities() -> Result<String> {
    const S: usize = 8;
    let tower = Tower::new(TowerParams {
        max_stage: S,
        ..TowerParams::default()
    })?;
    let e1 = DisjointFamilySummary::from_parts([], BigUint::from(1u32));

    // recurrences replayed in machine integers
    let (mut m, mut n_coords) = (1u128, 1u128);
    for j in 1..=S {
        ensure!(tower.m(j)? == &BigUint::from(m), "m_{j}");
        ensure!(tower.n_coords(j)? == &BigUint::from(n_coords), "N_{j}");
        ensure!(tower.q(j)?.rank() == BigUint::from(m), "rank q_{j}");
        ensure!(
            tower.pushforward(j, 1, &e1)?.rank() == BigUint::from(m),
            "rank of e_1 at stage {j}"
        );
        let counts = tower.map_counts(j, j)?;
        ensure!(
            counts.k_ij == BigUint::from(1u32) && counts.l_ij == BigUint::from(0u32),
            "k_jj, l_jj at {j}"
        );
        let k = 1u128 << j;
        m *= k + 1;
        n_coords = k * n_coords + (j as u128 + 1) * m;
    }
    for (j, (m, n)) in [(1, (1u32, 1u32)), (2, (3, 8)), (3, (15, 77)), (4, (135, 1156))] {
        ensure!(
            tower.m(j)? == &BigUint::from(m) && tower.n_coords(j)? == &BigUint::from(n),
            "pinned stage {j}"
        );
    }

    let mut pairs = 0;
    for i in 1..=S {
        for j in 1..=i {
            for n in 1..=6 {
                ensure!(
                    tower.b_count(i, j, n)? >= tower.a_count(i, j, n)?,
                    "b < a at ({i},{j}), n = {n}"
                );
                pairs += 1;
            }
        }
    }
    Ok(format!("stages 1..={S} consistent, b ≥ a on {pairs} triples"))
}

fn enclosure() -> Result<String> {
    let start = Instant::now();
    let k = KSequence::default();
    let d20 = r_enclosure_at(&k, 20)?;
    let d30 = r_enclosure_at(&k, 30)?;
    let d40 = r_enclosure_at(&k, 40)?;
    ensure!(
        d20.contains_interval(&d30) && d30.contains_interval(&d40),
        "enclosures are not nested"
    );
    let tol = BigRational::new(BigInt::from(1), BigInt::from(1_000_000));
    ensure!(d40.width() < tol, "width {} at depth 40", d40.width());
    ensure!(d40.hi() < &BigRational::from_integer(BigInt::from(2)), "R_hi ≥ 2");
    let elapsed = within(start, Duration::from_secs(10))?;
    Ok(format!(
        "R in [{:.10}, {:.10}] ({elapsed:.1?})",
        to_f64(d40.lo()),
        to_f64(d40.hi())
    ))
}

fn to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

fn end_to_end(dir: &Path) -> Result<String> {
    let start = Instant::now();
    let mut witnesses = Vec::new();
    for n in [2u64, 3, 4] {
        let mut runs = Vec::new();
        for attempt in 0..2 {
            let path = dir.join(format!("cert-{n}-{attempt}.json"));
            let (stdout, code) = run_cli(&[
                "verify-simple-example",
                "--n",
                &n.to_string(),
                "--json",
                path.to_str().unwrap(),
            ])?;
            ensure!(code == 0, "n = {n}: exit code {code}");
            runs.push((stdout, std::fs::read(&path)?));
        }
        ensure!(runs[0] == runs[1], "n = {n}: repeated runs differ");

        let cert = Certificate::from_json(std::str::from_utf8(&runs[0].1)?)?;
        cert.check()?;
        ensure!(
            cert.n == n && cert.params.max_stage >= 12,
            "n = {n}: unexpected parameters"
        );
        let tower = Tower::new(cert.params.clone())?;
        for c in &cert.stage_checks {
            let limit = &cert.threshold * tower.m(c.i)?;
            ensure!(
                c.limit == limit && c.a_count < limit,
                "n = {n}: stage check ({},{})",
                c.i,
                c.j
            );
        }
        let w = &cert.witness;
        ensure!(
            w.limit == &cert.threshold * tower.m(w.i)? && w.b_count >= w.limit,
            "n = {n}: witness"
        );
        witnesses.push(format!("n={n}: T={} witness ({},{})", cert.threshold, w.i, w.j));
    }
    let elapsed = within(start, Duration::from_secs(600))?;
    Ok(format!("{} ({elapsed:.1?})", witnesses.join(", ")))
}

fn trace_growth() -> Result<String> {
    for mode in ["simple", "nonsimple"] {
        let (stdout, code) = run_cli(&["trace-growth", "--mode", mode, "--stages", "20"])?;
        ensure!(code == 0, "{mode}: exit code {code}");
        let report: Value = serde_json::from_slice(&stdout)?;
        let rank = report["unit_rank"].as_u64().context("unit_rank")?;
        let entries = report["entries"].as_array().context("entries")?;
        ensure!(entries.len() == 20, "{mode}: {} entries", entries.len());
        for (c, e) in (1u64..).zip(entries) {
            ensure!(e["stages"].as_u64() == Some(c), "{mode}: entry {c} out of order");
            ensure!(
                e["coefficient"].as_str() == Some(&(c * rank).to_string()),
                "{mode}: τ at c = {c}"
            );
        }
    }
    Ok("c·k·rank(E) for c = 1..=20 in both modes".into())
}

// paths to every scalar in the JSON tree
fn leaves(v: &Value, path: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
    match v {
        Value::Object(map) => {
            for (k, child) in map {
                path.push(k.clone());
                leaves(child, path, out);
                path.pop();
            }
        }
        Value::Array(items) => {
            for (i, child) in items.iter().enumerate() {
                path.push(i.to_string());
                leaves(child, path, out);
                path.pop();
            }
        }
        _ => out.push(path.clone()),
    }
}

fn leaf_mut<'a>(v: &'a mut Value, path: &[String]) -> &'a mut Value {
    path.iter().fold(v, |v, key| match v {
        Value::Array(items) => &mut items[key.parse::<usize>().unwrap()],
        other => &mut other[key.as_str()],
    })
}

/// Replaces one character of the scalar's text by a different one of the same class.
fn mutate_text(text: &str, rng: &mut ChaCha8Rng) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    let pos = rng.gen_range(0..chars.len());
    let old = chars[pos];
    let pool: Vec<char> = if old.is_ascii_digit() {
        ('0'..='9').filter(|&c| c != old).collect()
    } else {
        ('a'..='z').chain(['-']).filter(|&c| c != old).collect()
    };
    chars[pos] = *pool.choose(rng).unwrap();
    chars.into_iter().collect()
}

fn mutate(v: &mut Value, rng: &mut ChaCha8Rng) {
    *v = match v {
        Value::String(s) => Value::String(mutate_text(s, rng)),
        Value::Number(n) => serde_json::from_str(&mutate_text(&n.to_string(), rng)).unwrap(),
        Value::Bool(b) => Value::Bool(!*b),
        Value::Null => Value::from(0),
        _ => unreachable!("leaves are scalars"),
    }
}

fn fuzzing(dir: &Path) -> Result<String> {
    const MUTATIONS: usize = 100;
    let path = dir.join("fuzz-base.json");
    let (_, code) = run_cli(&["verify-simple-example", "--n", "2", "--json", path.to_str().unwrap()])?;
    ensure!(code == 0, "base certificate: exit code {code}");
    let text = std::fs::read_to_string(&path)?;
    Certificate::from_json(&text)?
        .check()
        .context("base certificate must verify")?;
    let base: Value = serde_json::from_str(&text)?;

    let mut all = Vec::new();
    leaves(&base, &mut Vec::new(), &mut all);
    // every field outside the stage-check list once, the rest drawn at random
    let (mut targets, stage_leaves): (Vec<_>, Vec<_>) = all.into_iter().partition(|p| p[0] != "stage_checks");
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0007);
    ensure!(targets.len() < MUTATIONS, "too many header fields");
    while targets.len() < MUTATIONS {
        targets.push(stage_leaves.choose(&mut rng).unwrap().clone());
    }

    let mut parse_rejects = 0;
    for target in &targets {
        let mut mutated = base.clone();
        mutate(leaf_mut(&mut mutated, target), &mut rng);
        ensure!(mutated != base, "mutation of {} changed nothing", target.join("."));
        match Certificate::from_json(&mutated.to_string()) {
            Err(_) => parse_rejects += 1,
            Ok(cert) => {
                if cert.check().is_ok() {
                    bail!("mutation of {} was accepted", target.join("."));
                }
            }
        }
    }
    Ok(format!(
        "{MUTATIONS} mutations rejected ({parse_rejects} at parse time, {} by self-check)",
        MUTATIONS - parse_rejects
    ))
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let criteria: [(&str, Criterion); 7] = [
        ("oracle triangle", Box::new(oracle_triangle)),
        ("sharpness", Box::new(sharpness)),
        ("stage identities", Box::new(identities)),
        ("R enclosure", Box::new(enclosure)),
        ("end-to-end certificate", Box::new(|| end_to_end(dir.path()))),
        ("trace growth", Box::new(trace_growth)),
        ("certificate fuzzing", Box::new(|| fuzzing(dir.path()))),
    ];
    let mut failed = 0;
    for (number, (name, criterion)) in (1..).zip(criteria.iter()) {
        match criterion() {
            Ok(detail) => println!("PASS  {number}. {name}: {detail}"),
            Err(e) => {
                failed += 1;
                println!("FAIL  {number}. {name}: {e:#}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
