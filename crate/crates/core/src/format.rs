//! Text formats: the line-oriented instance file and the `i:j` matching literal.
//!
//! ```text
//! # comment
//! n1 n2 n3
//! P <j> <c_j> <lecturer k>        (n2 lines)
//! L <k> <d_k> : <project ids>     (n3 lines)
//! S <i> : <project ids>           (n1 lines)
//! ```

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{Instance, Lecturer, LecturerId, Matching, Project, ProjectId, Student, StudentId};

/// The three-student worked example: every project has capacity 1, `l1`
/// has capacity 2 and `l2` capacity 1.
pub const WORKED: &str = "\
# s1: p3 p2 p1   s2: p1 p2   s3: p3
# l1: p2 p1      l2: p3
3 3 2
P 1 1 1
P 2 1 1
P 3 1 2
L 1 2 : 2 1
L 2 1 : 3
S 1 : 3 2 1
S 2 : 1 2
S 3 : 3
";

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn number(tok: Option<&str>, line: usize, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| syntax(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| syntax(line, format!("expected {what}, found `{tok}`")))
}

fn index(tok: Option<&str>, line: usize, what: &str, count: usize) -> Result<usize> {
    let n = number(tok, line, what)?;
    if n == 0 || n > count {
        return Err(syntax(line, format!("{what} {n} out of range 1..={count}")));
    }
    Ok(n - 1)
}

fn project_list<'a>(
    toks: impl Iterator<Item = &'a str>,
    line: usize,
    n2: usize,
) -> Result<Vec<ProjectId>> {
    let mut toks = toks.peekable();
    match toks.next() {
        Some(":") => {}
        Some(t) => return Err(syntax(line, format!("expected `:`, found `{t}`"))),
        None => return Err(syntax(line, "expected `:`")),
    }
    toks.map(|t| index(Some(t), line, "project", n2).map(ProjectId::new))
        .collect()
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut lines = text.lines().enumerate().filter_map(|(no, raw)| {
        let body = raw.split('#').next().unwrap_or("").trim();
        (!body.is_empty()).then_some((no + 1, body))
    });

    let (first, header) = lines.next().ok_or_else(|| syntax(1, "empty input"))?;
    let mut toks = header.split_whitespace();
    let n1 = number(toks.next(), first, "student count")?;
    let n2 = number(toks.next(), first, "project count")?;
    let n3 = number(toks.next(), first, "lecturer count")?;
    if let Some(t) = toks.next() {
        return Err(syntax(first, format!("unexpected token `{t}` after counts")));
    }

    let mut projects: Vec<Option<Project>> = vec![None; n2];
    let mut lecturers: Vec<Option<Lecturer>> = vec![None; n3];
    let mut students: Vec<Option<Student>> = vec![None; n1];

    for (no, body) in lines {
        let mut toks = body.split_whitespace();
        match toks.next() {
            Some("P") => {
                let j = index(toks.next(), no, "project", n2)?;
                let capacity = number(toks.next(), no, "capacity")?;
                let k = index(toks.next(), no, "lecturer", n3)?;
                if let Some(t) = toks.next() {
                    return Err(syntax(no, format!("unexpected token `{t}`")));
                }
                if projects[j].is_some() {
                    return Err(syntax(no, format!("p{} defined twice", j + 1)));
                }
                projects[j] = Some(Project {
                    id: ProjectId::new(j),
                    capacity,
                    lecturer: LecturerId::new(k),
                });
            }
            Some("L") => {
                let k = index(toks.next(), no, "lecturer", n3)?;
                let capacity = number(toks.next(), no, "capacity")?;
                let prefs = project_list(toks, no, n2)?;
                if lecturers[k].is_some() {
                    return Err(syntax(no, format!("l{} defined twice", k + 1)));
                }
                lecturers[k] = Some(Lecturer {
                    id: LecturerId::new(k),
                    capacity,
                    prefs,
                });
            }
            Some("S") => {
                let i = index(toks.next(), no, "student", n1)?;
                let prefs = project_list(toks, no, n2)?;
                if students[i].is_some() {
                    return Err(syntax(no, format!("s{} defined twice", i + 1)));
                }
                students[i] = Some(Student {
                    id: StudentId::new(i),
                    prefs,
                });
            }
            Some(t) => return Err(syntax(no, format!("unknown record `{t}`"))),
            None => unreachable!("blank lines are filtered"),
        }
    }

    fn collect<T>(v: Vec<Option<T>>, tag: char) -> Result<Vec<T>> {
        v.into_iter()
            .enumerate()
            .map(|(i, x)| x.ok_or_else(|| Error::Invalid(format!("{tag}{} is not defined", i + 1))))
            .collect()
    }
    Instance::new(
        collect(students, 's')?,
        collect(projects, 'p')?,
        collect(lecturers, 'l')?,
    )
}

fn push_list(out: &mut String, prefs: &[ProjectId]) {
    out.push_str(" :");
    for p in prefs {
        let _ = write!(out, " {}", p.number());
    }
    out.push('\n');
}

/// Canonical text form; parses back to an equal instance.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {}",
        inst.n_students(),
        inst.n_projects(),
        inst.n_lecturers()
    );
    for p in inst.projects() {
        let _ = writeln!(
            out,
            "P {} {} {}",
            p.id.number(),
            p.capacity,
            p.lecturer.number()
        );
    }
    for l in inst.lecturers() {
        let _ = write!(out, "L {} {}", l.id.number(), l.capacity);
        push_list(&mut out, &l.prefs);
    }
    for s in inst.students() {
        let _ = write!(out, "S {}", s.id.number());
        push_list(&mut out, &s.prefs);
    }
    out
}

/// Parses `"1:2 2:1 3:3"` into a matching on `inst`.
pub fn parse_matching(inst: &Instance, literal: &str) -> Result<Matching> {
    let mut pairs = Vec::new();
    for tok in literal.split(|c: char| c.is_whitespace() || c == ',') {
        if tok.is_empty() {
            continue;
        }
        let (i, j) = tok
            .split_once(':')
            .ok_or_else(|| Error::Param(format!("matching pair `{tok}` is not `i:j`")))?;
        let parse = |x: &str| {
            x.trim_start_matches(['s', 'p'])
                .parse::<usize>()
                .map_err(|_| Error::Param(format!("bad index in matching pair `{tok}`")))
        };
        pairs.push((parse(i)?, parse(j)?));
    }
    Matching::from_numbers(inst, &pairs)
}

/// Inverse of [`parse_matching`].
pub fn format_matching(m: &Matching) -> String {
    m.pairs()
        .map(|(s, p)| format!("{}:{}", s.number(), p.number()))
        .collect::<Vec<_>>()
        .join(" ")
}
