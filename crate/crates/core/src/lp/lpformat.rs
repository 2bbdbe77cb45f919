use std::fmt::Write;

use super::{LinearModel, Sense};

fn sanitize(name: &str, fallback: impl FnOnce() -> String) -> String {
    if name.is_empty() {
        return fallback();
    }
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.()[]".contains(c) { c } else { '_' })
        .collect()
}

fn term(out: &mut String, coeff: f64, name: &str, first: bool) {
    let sign = if coeff < 0.0 { "-" } else if first { "" } else { "+" };
    let mag = coeff.abs();
    if mag == 1.0 {
        let _ = write!(out, " {sign} {name}");
    } else {
        let _ = write!(out, " {sign} {mag} {name}");
    }
}

pub(super) fn write(model: &LinearModel) -> String {
    let names: Vec<String> = model
        .vars()
        .iter()
        .enumerate()
        .map(|(j, v)| sanitize(&v.name, || format!("x{j}")))
        .collect();
    let mut out = String::from("Maximize\n obj:");
    let mut first = true;
    for (j, v) in model.vars().iter().enumerate() {
        if v.objective != 0.0 {
            term(&mut out, v.objective, &names[j], first);
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, r) in model.rows().iter().enumerate() {
        let _ = write!(out, " {}:", sanitize(&r.name, || format!("r{i}")));
        for (k, &(v, a)) in r.terms.iter().enumerate() {
            term(&mut out, a, &names[v.0], k == 0);
        }
        if r.terms.is_empty() {
            out.push_str(" 0 x0");
        }
        let sense = match r.sense {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {sense} {}", r.rhs);
    }
    out.push_str("Bounds\n");
    for (j, v) in model.vars().iter().enumerate() {
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) => {
                let _ = writeln!(out, " {} <= {} <= {}", v.lower, names[j], v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {} >= {}", names[j], v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {} <= {}", names[j], v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {} free", names[j]);
            }
        }
    }
    let ints: Vec<&str> = model
        .vars()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.integer)
        .map(|(j, _)| names[j].as_str())
        .collect();
    if !ints.is_empty() {
        out.push_str("General\n");
        for name in ints {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::lp::{LinearModel, Sense};

    #[test]
    fn dump_has_all_sections() {
        let mut m = LinearModel::new();
        let x = m.add_binary("y[s1,v0->v1]", -10.0);
        let z = m.add_continuous("", 0.0, f64::INFINITY, 2.0);
        m.add_row("cap", [(x, -100.0), (z, 1.0)], Sense::Le, 0.0);
        let text = m.to_lp_format();
        assert!(text.starts_with("Maximize\n obj: - 10 y[s1_v0__v1] + 2 x1"));
        assert!(text.contains(" cap: - 100 y[s1_v0__v1] + x1 <= 0"));
        assert!(text.contains(" x1 >= 0"));
        assert!(text.contains("General\n y[s1_v0__v1]\nEnd"));
    }
}
