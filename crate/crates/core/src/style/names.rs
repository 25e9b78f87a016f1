use crate::bibtex::Name;

use super::NameFormat;

/// Reduces given names to initials: "Jean-Paul Ann" → "J.-P. A.".
pub fn initials(first: &str) -> String {
    first
        .split_whitespace()
        .map(|word| {
            word.split('-')
                .filter_map(|part| {
                    part.chars()
                        .find(|c| c.is_alphanumeric())
                        .map(|c| format!("{}.", c.to_uppercase()))
                })
                .collect::<Vec<_>>()
                .join("-")
        })
        .filter(|w| !w.is_empty())
        .collect::<Vec<_>>()
        .join(" ")
}

fn strip_braces(s: &str) -> String {
    s.chars().filter(|&c| c != '{' && c != '}').collect()
}

fn von_last(name: &Name) -> String {
    let mut s = String::new();
    if !name.von.is_empty() {
        s.push_str(&name.von);
        s.push(' ');
    }
    s.push_str(&name.last);
    s
}

/// Formats one name.
pub fn format_name(name: &Name, format: NameFormat) -> String {
    let given = match format {
        NameFormat::Full | NameFormat::LastFirst => name.first.clone(),
        NameFormat::InitialsFirst | NameFormat::InitialsLast => initials(&name.first),
    };
    let vl = von_last(name);
    let out = match format {
        NameFormat::Full | NameFormat::InitialsFirst => {
            let mut s = String::new();
            if !given.is_empty() {
                s.push_str(&given);
                s.push(' ');
            }
            s.push_str(&vl);
            if !name.jr.is_empty() {
                s.push_str(", ");
                s.push_str(&name.jr);
            }
            s
        }
        NameFormat::InitialsLast | NameFormat::LastFirst => {
            let mut s = vl;
            if !name.jr.is_empty() {
                s.push_str(", ");
                s.push_str(&name.jr);
            }
            if !given.is_empty() {
                s.push_str(", ");
                s.push_str(&given);
            }
            s
        }
    };
    strip_braces(&out)
}

/// Formats a name list: "A", "A and B", "A, B and C".
///
/// Lists longer than `et_al` (or ending in `others`) collapse to "A et al.".
pub fn format_names(names: &[Name], format: NameFormat, et_al: Option<usize>) -> String {
    let has_others = names.last().is_some_and(Name::is_others);
    let real: Vec<&Name> = names.iter().filter(|n| !n.is_others()).collect();
    if real.is_empty() {
        return String::new();
    }
    let truncate = has_others || et_al.is_some_and(|t| real.len() > t);
    if truncate {
        return format!("{} et al.", format_name(real[0], format));
    }
    let parts: Vec<String> = real.iter().map(|n| format_name(n, format)).collect();
    match parts.len() {
        1 => parts[0].clone(),
        n => format!("{} and {}", parts[..n - 1].join(", "), parts[n - 1]),
    }
}

/// Initials-first name list.
pub fn abbreviate_names(names: &[Name], et_al: Option<usize>) -> String {
    format_names(names, NameFormat::InitialsFirst, et_al)
}

const JOURNAL_ABBREVIATIONS: &[(&str, &str)] = &[
    ("Journal", "J."),
    ("Transactions", "Trans."),
    ("Proceedings", "Proc."),
    ("International", "Int."),
    ("Conference", "Conf."),
    ("Review", "Rev."),
    ("Letters", "Lett."),
    ("Physics", "Phys."),
    ("Physical", "Phys."),
    ("Mathematics", "Math."),
    ("Mathematical", "Math."),
    ("Computer", "Comput."),
    ("Computing", "Comput."),
    ("Science", "Sci."),
    ("Sciences", "Sci."),
    ("Research", "Res."),
    ("American", "Am."),
    ("European", "Eur."),
    ("Society", "Soc."),
    ("Annals", "Ann."),
    ("Applied", "Appl."),
    ("Quarterly", "Q."),
    ("Economic", "Econ."),
    ("Economics", "Econ."),
    ("Statistics", "Stat."),
    ("Statistical", "Stat."),
    ("Engineering", "Eng."),
    ("Information", "Inf."),
    ("Systems", "Syst."),
    ("Theoretical", "Theor."),
    ("Advances", "Adv."),
    ("Communications", "Commun."),
    ("Association", "Assoc."),
    ("Machine", "Mach."),
    ("Learning", "Learn."),
];

/// Standard-style journal abbreviation; drops "of", "the" and "on".
pub fn abbreviate_journal(journal: &str) -> String {
    journal
        .split_whitespace()
        .filter(|w| !matches!(*w, "of" | "the" | "on"))
        .map(|w| {
            JOURNAL_ABBREVIATIONS
                .iter()
                .find(|(full, _)| *full == w)
                .map(|(_, abbr)| abbr.to_string())
                .unwrap_or_else(|| w.to_string())
        })
        .collect::<Vec<_>>()
        .join(" ")
}
