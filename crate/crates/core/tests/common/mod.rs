//! Seeded synthetic BibTeX corpora for integration tests.
#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use citeforge::bibtex::{parse_bib_with, BibEntry, MacroTable};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FIRST: &[&str] = &[
    "John", "Anna", "Maria", "Wei", "Yuki", "Carlos", "Fatima", "Olga", "Pierre", "Hans", "Priya", "Ahmed",
    "Laura", "Jean-Paul", "Kenji", "Sofia", "David", "Elena", "Tomás", "Ingrid", "Rahul", "Chen", "Emily",
    "Michael", "Sarah", "Luca", "Nadia", "Omar", "Hiroshi", "Grace", "Daniel", "Ana", "Mark", "Julia",
    "Peter", "Lin", "Sven", "Aisha", "Robert", "Claire", "Andrew", "Mei", "Paul", "Rosa", "Victor",
];

const LAST: &[&str] = &[
    "Smith", "Garcia", "M{\\\"u}ller", "Wang", "Tanaka", "Rossi", "Dubois", "Kowalski", "Nguyen", "Silva",
    "Ivanova", "Johansson", "Patel", "Kim", "Cohen", "Schmidt", "Martin", "Lopez", "Chen", "Brown",
    "Hern{\\'a}ndez", "Novak", "Yilmaz", "Andersen", "O'Brien", "Sato", "Fischer", "Moreau", "Costa", "Zhang",
    "Taylor", "Wilson", "Khan", "Okafor", "Lindqvist", "Petrov", "Suzuki", "Jensen", "Ricci", "Weber",
    "Nakamura", "Larsen", "Popescu", "Horvath", "Santos", "Clark", "Lewis", "Walker", "Young", "Hall",
    "G{\\\"o}del", "Erd{\\H{o}}s", "Brandt", "Keller", "Varga", "Bianchi", "Evans", "Murphy", "Reyes", "Adams",
];

const VON: &[&str] = &["van", "de", "von", "van der", "de la", "di"];

const TITLE_WORDS: &[&str] = &[
    "learning", "networks", "graph", "neural", "efficient", "robust", "analysis", "model", "models", "theory",
    "approach", "algorithms", "data", "structure", "structures", "optimization", "stochastic", "inference",
    "bayesian", "deep", "representation", "sparse", "linear", "nonlinear", "dynamics", "systems", "control",
    "adaptive", "estimation", "parallel", "distributed", "memory", "language", "semantic", "parsing", "text",
    "retrieval", "vision", "image", "segmentation", "detection", "recognition", "sequence", "labeling",
    "fields", "random", "conditional", "markov", "chains", "processes", "quantum", "protein", "gene",
    "expression", "cell", "climate", "ocean", "energy", "market", "policy", "evidence", "survey",
    "towards", "scalable", "fast", "exact", "approximate", "bounds", "lower", "upper", "complexity",
    "query", "database", "logic", "programs", "verification", "compiler", "types", "functional",
    "concurrent", "secure", "privacy", "federated", "transfer", "multilingual", "citation", "extraction",
    "synthesis", "evaluation", "benchmark", "metrics", "kernel", "manifold", "spectral", "clustering",
];

const LINK_WORDS: &[&str] = &["of", "for", "in", "with", "and", "on", "via", "under", "from"];

const JOURNALS: &[&str] = &[
    "Journal of Machine Learning Research",
    "Transactions on Pattern Analysis and Machine Intelligence",
    "Physical Review Letters",
    "Annals of Statistics",
    "Journal of the American Statistical Association",
    "Communications of the Association for Computing Machinery",
    "Nature",
    "Science",
    "Bioinformatics",
    "Computational Linguistics",
    "Journal of Applied Physics",
    "International Journal of Computer Vision",
    "Quarterly Journal of Economics",
    "American Economic Review",
    "Information Systems",
    "Theoretical Computer Science",
    "Mathematical Programming",
    "Journal of Chemical Physics",
    "European Journal of Operational Research",
    "Advances in Applied Mathematics",
    "Neural Computation",
    "Artificial Intelligence",
    "Cell",
    "Journal of Computational Physics",
    "Review of Economic Studies",
    "Machine Learning",
    "Journal of Statistical Software",
    "Engineering Applications of Artificial Intelligence",
    "Information Processing Letters",
    "Journal of Fluid Mechanics",
];

const VENUES: &[&str] = &[
    "Conference on Neural Information Processing Systems",
    "International Conference on Machine Learning",
    "Annual Meeting of the Association for Computational Linguistics",
    "Conference on Computer Vision and Pattern Recognition",
    "Symposium on Theory of Computing",
    "International Conference on Learning Representations",
    "Conference on Empirical Methods in Natural Language Processing",
    "Symposium on Principles of Programming Languages",
    "International Conference on Very Large Data Bases",
    "Conference on Uncertainty in Artificial Intelligence",
    "International Joint Conference on Artificial Intelligence",
    "Workshop on Algorithms in Bioinformatics",
    "European Conference on Computer Vision",
    "Conference on Knowledge Discovery and Data Mining",
];

const PUBLISHERS: &[&str] = &[
    "Springer", "MIT Press", "Cambridge University Press", "Oxford University Press", "Elsevier",
    "Wiley", "Morgan Kaufmann", "Addison-Wesley", "Prentice Hall", "Academic Press", "ACM Press",
    "IEEE Computer Society", "CRC Press", "Princeton University Press", "Birkh{\\\"a}user",
];

const CITIES: &[&str] = &[
    "New York", "Berlin", "London", "Cambridge, MA", "Amsterdam", "Boston", "Tokyo", "Paris", "Zurich",
    "San Francisco", "Oxford", "Princeton", "Heidelberg", "Montreal", "Vienna", "Barcelona",
];

const SCHOOLS: &[&str] = &[
    "University of Massachusetts Amherst", "Stanford University", "Massachusetts Institute of Technology",
    "University of Oxford", "ETH Zurich", "University of Tokyo", "Carnegie Mellon University",
    "Technical University of Munich", "University of Toronto", "University of Edinburgh",
];

const INSTITUTIONS: &[&str] = &[
    "Microsoft Research", "Bell Laboratories", "IBM Research", "Max Planck Institute for Informatics",
    "National Institute of Standards and Technology", "INRIA", "Los Alamos National Laboratory",
];

const ORDINALS: &[&str] = &["First", "Second", "Third", "12th", "21st", "30th", "Fifth", "Tenth", "17th", "25th"];

const MONTHS: &[&str] = &["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"];

fn person(rng: &mut ChaCha8Rng) -> String {
    let first = *FIRST.choose(rng).unwrap();
    let last = *LAST.choose(rng).unwrap();
    let middle = if rng.random_bool(0.2) {
        format!(" {}.", (b'A' + rng.random_range(0..26u8)) as char)
    } else {
        String::new()
    };
    let first = if rng.random_bool(0.15) {
        format!("{}.", first.chars().next().unwrap())
    } else {
        first.to_string()
    };
    if rng.random_bool(0.06) {
        let von = *VON.choose(rng).unwrap();
        return if rng.random_bool(0.5) {
            format!("{first}{middle} {von} {last}")
        } else {
            format!("{von} {last}, {first}{middle}")
        };
    }
    if rng.random_bool(0.6) {
        format!("{last}, {first}{middle}")
    } else {
        format!("{first}{middle} {last}")
    }
}

fn authors(rng: &mut ChaCha8Rng) -> String {
    let n = *[1usize, 1, 2, 2, 2, 3, 3, 3, 4, 4, 5, 6, 8].choose(rng).unwrap();
    let mut names: Vec<String> = (0..n).map(|_| person(rng)).collect();
    if rng.random_bool(0.03) {
        names.push("others".to_string());
    }
    names.join(" and ")
}

fn capitalize(w: &str) -> String {
    let mut c = w.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

fn title(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(3..=11);
    let mut words = Vec::with_capacity(n);
    for i in 0..n {
        let w = if i > 0 && i + 1 < n && rng.random_bool(0.2) {
            LINK_WORDS.choose(rng).unwrap().to_string()
        } else {
            TITLE_WORDS.choose(rng).unwrap().to_string()
        };
        words.push(if i == 0 || rng.random_bool(0.3) { capitalize(&w) } else { w });
    }
    if rng.random_bool(0.1) {
        let acronym: String = (0..rng.random_range(2..=4))
            .map(|_| (b'A' + rng.random_range(0..26u8)) as char)
            .collect();
        words.insert(rng.random_range(0..=words.len()), format!("{{{acronym}}}"));
    }
    let mut t = words.join(" ");
    if rng.random_bool(0.15) {
        let sub = TITLE_WORDS.choose(rng).unwrap();
        t = format!("{t}: {} {}", capitalize(sub), TITLE_WORDS.choose(rng).unwrap());
    }
    t
}

fn pages(rng: &mut ChaCha8Rng) -> String {
    let start = rng.random_range(1..2000);
    format!("{start}--{}", start + rng.random_range(1..40))
}

fn field(out: &mut String, name: &str, value: &str) {
    let _ = writeln!(out, "  {name} = {{{value}}},");
}

fn macro_field(out: &mut String, name: &str, macro_name: &str) {
    let _ = writeln!(out, "  {name} = {macro_name},");
}

/// One synthetic entry; journal names may reference `@string` macros `j0`, `j1`, ...
fn entry(rng: &mut ChaCha8Rng, key: &str, journal_macros: usize) -> String {
    let kind = *[
        "article", "article", "article", "article", "article", "article", "inproceedings", "inproceedings",
        "inproceedings", "inproceedings", "book", "incollection", "phdthesis", "mastersthesis", "techreport",
    ]
    .choose(rng)
    .unwrap();
    let mut out = format!("@{kind}{{{key},\n");
    field(&mut out, "author", &authors(rng));
    field(&mut out, "title", &title(rng));
    match kind {
        "article" => {
            let j = rng.random_range(0..JOURNALS.len());
            if j < journal_macros && rng.random_bool(0.5) {
                macro_field(&mut out, "journal", &format!("j{j}"));
            } else {
                field(&mut out, "journal", JOURNALS[j]);
            }
            field(&mut out, "volume", &rng.random_range(1..80).to_string());
            if rng.random_bool(0.6) {
                field(&mut out, "number", &rng.random_range(1..13).to_string());
            }
            if rng.random_bool(0.92) {
                field(&mut out, "pages", &pages(rng));
            }
        }
        "inproceedings" | "incollection" => {
            let venue = VENUES.choose(rng).unwrap();
            let booktitle = if kind == "incollection" {
                format!("Advances in {}", capitalize(TITLE_WORDS.choose(rng).unwrap()))
            } else if rng.random_bool(0.5) {
                format!("Proceedings of the {} {venue}", ORDINALS.choose(rng).unwrap())
            } else {
                format!("Proceedings of the {venue}")
            };
            field(&mut out, "booktitle", &booktitle);
            if rng.random_bool(0.85) {
                field(&mut out, "pages", &pages(rng));
            }
            if kind == "incollection" || rng.random_bool(0.1) {
                field(&mut out, "editor", &authors(rng));
            }
            if rng.random_bool(0.5) {
                field(&mut out, "publisher", PUBLISHERS.choose(rng).unwrap());
            }
            if rng.random_bool(0.5) {
                field(&mut out, "address", CITIES.choose(rng).unwrap());
            }
            if rng.random_bool(0.1) {
                field(&mut out, "series", "Lecture Notes in Computer Science");
                field(&mut out, "volume", &rng.random_range(100..9000).to_string());
            }
        }
        "book" => {
            field(&mut out, "publisher", PUBLISHERS.choose(rng).unwrap());
            if rng.random_bool(0.7) {
                field(&mut out, "address", CITIES.choose(rng).unwrap());
            }
            if rng.random_bool(0.25) {
                field(&mut out, "edition", ["Second", "Third", "2nd", "4th"].choose(rng).unwrap());
            }
        }
        "phdthesis" | "mastersthesis" => {
            field(&mut out, "school", SCHOOLS.choose(rng).unwrap());
            if rng.random_bool(0.5) {
                field(&mut out, "address", CITIES.choose(rng).unwrap());
            }
        }
        _ => {
            field(&mut out, "institution", INSTITUTIONS.choose(rng).unwrap());
            field(&mut out, "number", &format!("TR-{}", rng.random_range(1..999)));
            if rng.random_bool(0.3) {
                field(&mut out, "type", "Technical Memo");
            }
        }
    }
    if rng.random_bool(0.3) {
        macro_field(&mut out, "month", MONTHS.choose(rng).unwrap());
    }
    field(&mut out, "year", &rng.random_range(1965..2024).to_string());
    if rng.random_bool(0.2) {
        field(
            &mut out,
            "doi",
            &format!("10.{}/{}.{}", rng.random_range(1000..9999), rng.random_range(100..999), rng.random_range(1000..99999)),
        );
    }
    if rng.random_bool(0.04) {
        field(&mut out, "note", "To appear");
    }
    out.push_str("}\n\n");
    out
}

/// `n_files` BibTeX texts holding `n_entries` entries in total. The first file
/// defines journal macros used by later ones.
pub fn corpus_files(n_entries: usize, n_files: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let macros = 8;
    (0..n_files)
        .map(|f| {
            let mut text = String::new();
            if f == 0 {
                text.push_str("@comment{Journal abbreviations shared by every file.}\n");
                for (j, name) in JOURNALS.iter().take(macros).enumerate() {
                    let _ = writeln!(text, "@string{{j{j} = \"{name}\"}}");
                }
                text.push('\n');
            }
            let count = n_entries / n_files + usize::from(f < n_entries % n_files);
            for i in 0..count {
                text.push_str(&entry(&mut rng, &format!("f{f}e{i}"), macros));
            }
            (format!("source{f:02}.bib"), text)
        })
        .collect()
}

/// Parses corpus files in order, carrying macros forward.
pub fn parse_files(files: &[(String, String)]) -> Vec<BibEntry> {
    let mut macros = MacroTable::new();
    let mut entries = Vec::new();
    for (name, text) in files {
        let parsed = parse_bib_with(text, name, true, &macros).expect("synthetic corpus parses");
        for m in parsed.macros.names() {
            macros.insert(m, parsed.macros.get(m).unwrap());
        }
        entries.extend(parsed.entries);
    }
    entries
}

pub fn corpus(n_entries: usize, n_files: usize, seed: u64) -> Vec<BibEntry> {
    parse_files(&corpus_files(n_entries, n_files, seed))
}

/// Writes corpus files into `dir` and returns their paths.
pub fn write_corpus(dir: &Path, n_entries: usize, n_files: usize, seed: u64) -> Vec<PathBuf> {
    corpus_files(n_entries, n_files, seed)
        .into_iter()
        .map(|(name, text)| {
            let p = dir.join(name);
            std::fs::write(&p, text).unwrap();
            p
        })
        .collect()
}
