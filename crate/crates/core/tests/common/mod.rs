//! Generators shared by the integration and acceptance suites.
#![allow(dead_code)]

use inspect_core::day::Day;
use inspect_core::dsl::{IndicatorRequirement, MatchMode, QueryGraph};
use inspect_core::graph::{Edge, EdgeKind, KnowledgeGraph, Node};
use inspect_core::nlp::LabeledSnippet;
use inspect_core::IndicatorTaxonomy;
use proptest::prelude::*;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub const COUNTRIES: [&str; 3] = ["Country A", "Country B", "Country C"];
pub const ORGS: [&str; 3] = ["Org A", "Org B", "Org C"];

pub fn taxonomy(categories: usize) -> IndicatorTaxonomy {
    IndicatorTaxonomy::new((1..=categories).map(|i| format!("C{i}"))).unwrap()
}

/// Random knowledge network: up to `max_persons` persons holding random
/// dated indicators, random KNOWS ties and random country / org links.
pub fn random_graph<R: Rng>(rng: &mut R, max_persons: usize, categories: usize) -> KnowledgeGraph {
    let tax = taxonomy(categories);
    let mut g = KnowledgeGraph::new(tax.clone());
    for (i, c) in tax.categories().iter().enumerate() {
        g.add_node(Node::indicator(format!("ind{i:02}"), c)).unwrap();
    }
    for (i, c) in COUNTRIES.iter().enumerate() {
        g.add_node(Node::country(format!("country{i}"), c)).unwrap();
    }
    for (i, o) in ORGS.iter().enumerate() {
        g.add_node(Node::organization(format!("org{i}"), o)).unwrap();
    }
    let persons = rng.random_range(0..=max_persons);
    for p in 0..persons {
        let id = format!("p{p:02}");
        g.add_node(Node::person(id.as_str(), &format!("Person {p}"))).unwrap();
        for _ in 0..rng.random_range(0..=categories.min(6)) {
            let ind = format!("ind{:02}", rng.random_range(0..categories));
            let mut e = Edge::new(id.as_str(), ind, EdgeKind::HasIndicator);
            if rng.random_bool(0.7) {
                e = e.at(Day(rng.random_range(14_000..18_000)));
            }
            g.add_edge(e).unwrap();
        }
        if rng.random_bool(0.8) {
            g.add_edge(Edge::new(id.as_str(), format!("country{}", rng.random_range(0..3)), EdgeKind::LocatedIn))
                .unwrap();
        }
        if rng.random_bool(0.6) {
            g.add_edge(Edge::new(id.as_str(), format!("org{}", rng.random_range(0..3)), EdgeKind::AffiliatedWith))
                .unwrap();
        }
    }
    if persons > 1 {
        for _ in 0..rng.random_range(0..persons * 2) {
            let a = rng.random_range(0..persons);
            let b = rng.random_range(0..persons);
            if a != b {
                g.add_edge(Edge::new(format!("p{a:02}"), format!("p{b:02}"), EdgeKind::Knows)).unwrap();
            }
        }
    }
    g
}

pub fn random_query<R: Rng>(rng: &mut R, categories: usize, mode: MatchMode) -> QueryGraph {
    let n = rng.random_range(1..=5);
    let requirements = (0..n)
        .map(|_| {
            let c = format!("C{}", rng.random_range(1..=categories + 1)); // occasionally unknown
            let w = *[1.0, 1.0, 0.5, 2.0, 3.25].choose(rng).unwrap();
            IndicatorRequirement::weighted(c, w)
        })
        .collect();
    let mut q = QueryGraph::new("random", requirements);
    q.threshold = *[0.0, 0.25, 0.5, 0.7, 1.0].choose(rng).unwrap();
    q.mode = mode;
    if rng.random_bool(0.4) {
        q.country_filter = Some(COUNTRIES.choose(rng).unwrap().to_string());
    }
    if rng.random_bool(0.3) {
        q.org_filter = Some(ORGS.choose(rng).unwrap().to_string());
    }
    q
}

/// Random multi-label corpus with 1..=3 labels per snippet and a skewed
/// label distribution.
pub fn random_corpus<R: Rng>(rng: &mut R, n: usize, labels: usize) -> Vec<LabeledSnippet> {
    (0..n)
        .map(|i| {
            let count = rng.random_range(1..=3);
            let picked: Vec<String> = (0..count)
                .map(|_| {
                    // squaring skews toward low-numbered labels
                    let u: f64 = rng.random();
                    format!("C{}", 1 + ((u * u) * labels as f64) as usize)
                })
                .collect();
            LabeledSnippet::new(format!("snippet {i}"), picked)
        })
        .collect()
}

/// `|count − total/k| ≤ 1` for every fold of every label with total ≥ k.
pub fn folds_balanced(corpus: &[LabeledSnippet], folds: &inspect_core::nlp::FoldAssignment) -> Result<(), String> {
    let labels: std::collections::BTreeSet<&String> = corpus.iter().flat_map(|s| &s.labels).collect();
    for l in labels {
        let counts = folds.label_counts(corpus, l);
        let total: usize = counts.iter().sum();
        if total < folds.k {
            continue;
        }
        for (f, &c) in counts.iter().enumerate() {
            if (c * folds.k).abs_diff(total) > folds.k {
                return Err(format!("label {l}: fold {f} has {c} of {total} (k={})", folds.k));
            }
        }
    }
    Ok(())
}

/// Three categories with distinct presence rates and date distributions:
/// C1 clustered early, C2 spread across one year, C3 late and wide.
pub fn toy_trajectories(n: usize, seed: u64) -> Vec<inspect_core::synth::Trajectory> {
    use inspect_core::synth::{Event, Trajectory};
    use rand::SeedableRng;
    use rand_distr::{Distribution, Normal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let base = Day::from_ymd(2014, 1, 1).unwrap().0;
    let c1 = Normal::new(base as f64 + 60.0, 30.0).unwrap();
    let c3 = Normal::new(base as f64 + 1200.0, 150.0).unwrap();
    (0..n)
        .map(|i| {
            let mut events = Vec::new();
            if rng.random_bool(0.8) {
                let t = c1.sample(&mut rng).round() as i32;
                events.push(Event::new(Day(t), "C1"));
                if rng.random_bool(0.3) {
                    events.push(Event::new(Day(t + rng.random_range(1..400)), "C1"));
                }
            }
            if rng.random_bool(0.5) {
                events.push(Event::new(Day(base + 365 + rng.random_range(0..365)), "C2"));
            }
            if rng.random_bool(0.3) {
                events.push(Event::new(Day(c3.sample(&mut rng).round() as i32), "C3"));
            }
            Trajectory::new(Some(format!("p{i}")), events)
        })
        .collect()
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter of every network, using the three
/// training losses. Relative error is `|a − n| / max(|a|, |n|, floor)`.
pub fn gradient_check<R: Rng>(rng: &mut R, floor: f64) -> f64 {
    use inspect_core::synth::*;
    let categories = rng.random_range(1..=4);
    let tax = taxonomy(categories);
    let mapper = FeatureMapper {
        cdfs: tax
            .categories()
            .iter()
            .map(|c| CategoryCdf { category: c.clone(), support: vec![(0, 0.5), (10, 1.0)] })
            .collect(),
    };
    let mut hidden = || (0..rng.random_range(0..=2)).map(|_| rng.random_range(1..=6)).collect::<Vec<usize>>();
    let config = AaeConfig {
        latent_dim: 0,
        encoder_hidden: hidden(),
        decoder_hidden: hidden(),
        discriminator_hidden: hidden(),
        ..Default::default()
    };
    let config = AaeConfig {
        latent_dim: rng.random_range(1..=4),
        gaussian_posterior: rng.random_bool(0.5),
        mask_absent_times: rng.random_bool(0.5),
        ..config
    };
    let mut m = AaeModel::init(&config, &mapper, rng);
    let batch: Vec<Vec<f64>> =
        (0..rng.random_range(1..=5)).map(|_| (0..mapper.dim()).map(|_| rng.random()).collect()).collect();
    let prior: Vec<Vec<f64>> = (0..batch.len()).map(|_| m.prior.sample(rng)).collect();
    let noise: Vec<Vec<f64>> = (0..batch.len()).map(|_| m.prior.sample(rng)).collect();
    let codes: Vec<Vec<f64>> = batch.iter().map(|x| m.encode_sample(x, rng)).collect();
    let b: Vec<&[f64]> = batch.iter().map(|x| x.as_slice()).collect();

    let recon = |m: &AaeModel| reconstruction_grads(m, &b, &noise);
    let gen = |m: &AaeModel| generator_grads(m, &b, &noise);
    let disc = |m: &AaeModel| discriminator_grads(m, &codes, &prior);

    #[derive(Clone, Copy)]
    enum Net {
        Enc,
        Dec,
        Disc,
    }
    type Loss<'a> = Box<dyn Fn(&AaeModel) -> f64 + 'a>;
    let checks: Vec<(Net, Vec<f64>, Loss)> = vec![
        (Net::Enc, recon(&m).1.flat(), Box::new(|m: &AaeModel| recon(m).0)),
        (Net::Dec, recon(&m).2.flat(), Box::new(|m: &AaeModel| recon(m).0)),
        (Net::Disc, disc(&m).1.flat(), Box::new(|m: &AaeModel| disc(m).0)),
        (Net::Enc, gen(&m).1.flat(), Box::new(|m: &AaeModel| gen(m).0)),
    ];
    let h = 1e-5;
    let mut worst = 0.0f64;
    for (net, analytic, loss) in &checks {
        for (i, &a) in analytic.iter().enumerate() {
            let param = |m: &mut AaeModel| -> *mut f64 {
                match net {
                    Net::Enc => m.encoder.param(i),
                    Net::Dec => m.decoder.param(i),
                    Net::Disc => m.discriminator.param(i),
                }
            };
            let p = param(&mut m);
            // SAFETY: `p` points into `m`, which is not reallocated while perturbed
            let orig = unsafe { *p };
            unsafe { *p = orig + h };
            let up = loss(&m);
            unsafe { *p = orig - h };
            let down = loss(&m);
            unsafe { *p = orig };
            let n = (up - down) / (2.0 * h);
            worst = worst.max((a - n).abs() / a.abs().max(n.abs()).max(floor));
        }
    }
    worst
}

pub mod contract;
pub mod live;

fn arb_weight() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), (1u32..1000).prop_map(|n| n as f64 / 8.0), 1e-6f64..1e6,]
}

/// Queries with arbitrary Unicode names and categories, tiny and huge
/// weights and both modes.
pub fn arb_query() -> impl Strategy<Value = QueryGraph> {
    (
        "(?s).{0,16}",
        prop::collection::vec(("(?s).{1,12}", arb_weight()), 1..6),
        prop::option::of("(?s).{0,10}"),
        prop::option::of("(?s).{0,10}"),
        prop_oneof![Just(0.0), Just(1.0), Just(0.7), 0.0f64..=1.0],
        prop_oneof![Just(MatchMode::Individual), (1u32..5).prop_map(|radius| MatchMode::Neighborhood { radius })],
    )
        .prop_map(|(name, reqs, country, org, threshold, mode)| {
            let mut q =
                QueryGraph::new(name, reqs.into_iter().map(|(c, w)| IndicatorRequirement::weighted(c, w)).collect());
            q.country_filter = country;
            q.org_filter = org;
            q.threshold = threshold;
            q.mode = mode;
            q
        })
}

/// Generated separable corpus: every label owns a keyword vocabulary, each
/// label gets exactly `per_label` positives and snippets carry 1..=3
/// labels plus shared filler words.
pub fn separable_corpus<R: Rng>(rng: &mut R, labels: usize, per_label: usize) -> Vec<LabeledSnippet> {
    const FILLER: [&str; 12] = [
        "report", "member", "group", "online", "city", "week", "contact", "message", "meeting", "document", "source",
        "account",
    ];
    let keyword = |l: usize, j: usize| format!("zq{}{}vk", (b'a' + l as u8) as char, (b'a' + j as u8) as char);
    let mut remaining = vec![per_label; labels];
    let mut out = Vec::new();
    while remaining.iter().any(|&r| r > 0) {
        let open: Vec<usize> = (0..labels).filter(|&l| remaining[l] > 0).collect();
        let k = rng.random_range(1..=3).min(open.len());
        let picked: Vec<usize> = open.choose_multiple(rng, k).copied().collect();
        let mut words: Vec<String> = Vec::new();
        for &l in &picked {
            remaining[l] -= 1;
            for _ in 0..2 {
                words.push(keyword(l, rng.random_range(0..8)));
            }
        }
        for _ in 0..rng.random_range(3..=6) {
            words.push(FILLER.choose(rng).unwrap().to_string());
        }
        words.shuffle(rng);
        out.push(LabeledSnippet::new(words.join(" "), picked.iter().map(|l| format!("C{}", l + 1))));
    }
    out
}

pub fn fixture(name: &str) -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Persons holding 4, 3 and 2 of the four queried indicators with both
/// gates satisfied, plus a full holder outside the queried country.
pub fn fig3_graph() -> KnowledgeGraph {
    let f = std::fs::File::open(fixture("fig3.jsonl")).unwrap();
    inspect_core::graph::load(std::io::BufReader::new(f), IndicatorTaxonomy::default()).unwrap()
}
