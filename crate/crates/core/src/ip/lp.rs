use std::fmt::Write as _;

use super::{IpModel, VarId, VarKind};

/// Longest line emitted before an expression wraps onto a continuation line.
const MAX_LINE: usize = 240;

fn push_expr(out: &mut String, model: &IpModel, head: &str, terms: &[(VarId, i64)]) {
    let mut line = String::from(head);
    if terms.is_empty() {
        line.push_str(" 0");
    }
    for (n, &(v, c)) in terms.iter().enumerate() {
        let name = &model.variable(v).name;
        let piece = match (n, c) {
            (0, 1) => name.to_string(),
            (0, -1) => format!("- {name}"),
            (0, c) => format!("{c} {name}"),
            (_, 1) => format!("+ {name}"),
            (_, -1) => format!("- {name}"),
            (_, c) if c < 0 => format!("- {} {name}", -c),
            (_, c) => format!("+ {c} {name}"),
        };
        if line.len() + piece.len() + 1 > MAX_LINE {
            out.push_str(&line);
            out.push('\n');
            line = String::from("   ");
        }
        line.push(' ');
        line.push_str(&piece);
    }
    out.push_str(&line);
}

/// CPLEX LP text for the model. Output depends only on the model, so equal
/// models export byte-identical text.
pub fn export_lp(model: &IpModel) -> String {
    let (n1, n2, n3) = model.dimensions();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ SPA-P maximum stable matching: n1={n1} n2={n2} n3={n3} coalition_constraints={}",
        model.with_coalition()
    );
    out.push_str("Maximize\n");
    push_expr(&mut out, model, " obj:", model.objective());
    out.push_str("\nSubject To\n");
    for row in model.constraints() {
        push_expr(&mut out, model, &format!(" {}:", row.name), &row.terms);
        let _ = writeln!(out, " {} {}", row.sense, row.rhs);
    }
    out.push_str("Bounds\n");
    for var in model.variables() {
        if var.kind == VarKind::Integer {
            let _ = writeln!(out, " {} <= {} <= {}", var.lower, var.name, var.upper);
        }
    }
    for (section, kind) in [("Binary", VarKind::Binary), ("General", VarKind::Integer)] {
        let names: Vec<&str> = model
            .variables()
            .iter()
            .filter(|v| v.kind == kind)
            .map(|v| v.name.as_str())
            .collect();
        if names.is_empty() {
            continue;
        }
        let _ = writeln!(out, "{section}");
        for chunk in names.chunks(10) {
            let _ = writeln!(out, " {}", chunk.join(" "));
        }
    }
    out.push_str("End\n");
    out
}
