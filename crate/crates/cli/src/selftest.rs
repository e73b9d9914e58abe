//! Quick property checks bundled into the binary.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sharpnfa::{
    all_strings, app_union, brute_force_count, count, determinized_count, enumerate_language,
    sample_accepted, Budget, CountConfig, Nfa, Rational, Scalar, SetHandle, Symbol, UnionParams,
};
use sharpnfa_bench::{gen_random_nfa, NfaGenSpec};
use sharpnfa_rpq::{compile_regex, parse_regex, Alphabet};

type Check = Result<(), String>;
type NamedCheck = (&'static str, fn(u64) -> Check);

fn random_nfas(seed: u64, count: usize, max_m: usize) -> Vec<Nfa> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let m = rng.gen_range(1..=max_m);
            gen_random_nfa(&NfaGenSpec {
                m,
                sigma: 2,
                density: rng.gen_range(0.1..0.6),
                accepting: rng.gen_range(1..=m),
                seed: rng.gen(),
            })
        })
        .collect()
}

fn round_trip(seed: u64) -> Check {
    for a in random_nfas(seed, 20, 6) {
        for text in [a.to_text(), a.to_json()] {
            let b = Nfa::parse(&text).map_err(|e| e.to_string())?;
            if b != a {
                return Err(format!("{text} did not round-trip"));
            }
        }
    }
    Ok(())
}

fn oracles_agree(seed: u64) -> Check {
    let budget = Budget::default();
    for a in random_nfas(seed, 30, 5) {
        for n in 0..=6 {
            let brute = brute_force_count(&a, n, &budget).map_err(|e| e.to_string())?;
            let det = determinized_count(&a, n, &budget)
                .map_err(|e| e.to_string())?
                .total;
            if brute != det {
                return Err(format!(
                    "n={n}: brute {brute} vs determinized {det} on {a:?}"
                ));
            }
        }
    }
    Ok(())
}

fn regex_compiles_faithfully(_: u64) -> Check {
    let alphabet = Alphabet::standard(2);
    for text in ["(0|1)*1", "0*1*", "(01)+|1?", "((0|1)(0|1))*", "1(0*)1"] {
        let re = parse_regex(text, &alphabet).map_err(|e| e.to_string())?;
        let a = compile_regex(&re, 2);
        for n in 0..=5 {
            let got = enumerate_language(&a, n, &Budget::default()).map_err(|e| e.to_string())?;
            let got: BTreeSet<Vec<Symbol>> = got.into_iter().map(|w| w.into_symbols()).collect();
            let want: BTreeSet<Vec<Symbol>> = (0..1u32 << n)
                .map(|bits| {
                    (0..n)
                        .map(|i| ((bits >> (n - 1 - i)) & 1) as Symbol)
                        .collect::<Vec<_>>()
                })
                .filter(|w| re.matches(w))
                .collect();
            if got != want {
                return Err(format!("{text} at n={n}"));
            }
        }
    }
    Ok(())
}

fn union_sandwich(seed: u64) -> Check {
    let params = UnionParams::new(0.2, 0.1, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inside = 0;
    for _ in 0..40 {
        let need = params.thresh(2) as usize;
        let a: Vec<u32> = (0..need).map(|_| rng.gen_range(0..10)).collect();
        let b: Vec<u32> = (0..need).map(|_| rng.gen_range(5..30)).collect();
        let handles = [
            SetHandle::new((|x: &u32| *x < 10) as fn(&u32) -> bool, &a[..], 10.0),
            SetHandle::new(|x: &u32| (5..30).contains(x), &b[..], 25.0),
        ];
        let est = app_union(&params, &handles, &mut rng)
            .map_err(|e| e.to_string())?
            .estimate;
        if (30.0 / 1.2..=30.0 * 1.2).contains(&est) {
            inside += 1;
        }
    }
    if inside >= 32 {
        Ok(())
    } else {
        Err(format!("{inside}/40 estimates inside (1±0.2)·30"))
    }
}

fn all_strings_count(seed: u64) -> Check {
    let r = count::<Rational>(&all_strings(2), 4, &CountConfig::practical(0.5, 0.2), seed)
        .map_err(|e| e.to_string())?;
    let est = r.estimate.to_real();
    if (16.0 / 1.5..=24.0).contains(&est) {
        Ok(())
    } else {
        Err(format!("estimate {est} outside [10.67, 24]"))
    }
}

fn samples_are_members(seed: u64) -> Check {
    let cfg = CountConfig::practical(0.5, 0.2);
    for (i, a) in random_nfas(seed, 4, 4).iter().enumerate() {
        let Ok(lang) = enumerate_language(a, 5, &Budget::default()) else {
            continue;
        };
        if lang.is_empty() {
            continue;
        }
        let lang: BTreeSet<_> = lang.into_iter().collect();
        let out =
            sample_accepted::<f64>(a, 5, 10, &cfg, seed + i as u64).map_err(|e| e.to_string())?;
        if let Some(w) = out.words.iter().find(|w| !lang.contains(*w)) {
            return Err(format!("sampled {w:?} is not accepted"));
        }
    }
    Ok(())
}

fn seeded_runs_reproduce(seed: u64) -> Check {
    let a = &random_nfas(seed, 1, 4)[0];
    let cfg = CountConfig::practical(0.5, 0.2);
    let run = || {
        count::<Rational>(a, 6, &cfg, seed)
            .map(|r| r.estimate)
            .map_err(|e| e.to_string())
    };
    if run()? == run()? {
        Ok(())
    } else {
        Err("two runs with one seed differ".into())
    }
}

pub fn run_all(seed: u64) -> Vec<(&'static str, Check)> {
    let checks: [NamedCheck; 7] = [
        ("nfa formats round-trip", round_trip),
        ("brute force and determinized counts agree", oracles_agree),
        (
            "compiled regexes accept what they match",
            regex_compiles_faithfully,
        ),
        ("union estimate sandwich", union_sandwich),
        ("all-strings count sandwich", all_strings_count),
        ("sampled words are accepted", samples_are_members),
        ("seeded runs reproduce", seeded_runs_reproduce),
    ];
    checks.iter().map(|&(name, f)| (name, f(seed))).collect()
}
