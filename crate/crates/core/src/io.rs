//! Problem file format.
//!
//! Plain text, line oriented:
//!
//! ```text
//! sscqp 1
//! n 2
//! Q
//! 1 0
//! 0 1
//! A
//! 1 0
//! 0 1
//! b
//! 1 -2
//! c
//! 0
//! x0
//! 0 0
//! ```
//!
//! The first line is the magic `sscqp 1`, the second declares the dimension.
//! Sections `Q`, `A`, `b`, `c` are required; `x0` and `u` are optional.
//! Matrices are written as `n` lines of `n` whitespace-separated decimals in
//! row order, vectors as one line of `n` decimals, `c` as a single decimal.
//! A line whose first non-blank character is `#` is a comment and may appear
//! anywhere; blank lines are ignored. Decimals are written with 17
//! significant digits, which round-trips every f64 exactly.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::generator::GeneratedInstance;
use crate::linalg::{DenseMatrix, Vector};
use crate::model::QpProblem;

/// Magic tag and version on the first content line.
pub const FORMAT_MAGIC: &str = "sscqp 1";

/// Parsed problem file: the problem itself plus optional starting point and
/// planted solution sections.
#[derive(Clone, Debug)]
pub struct ProblemFile {
    pub problem: QpProblem,
    pub x0: Option<Vector>,
    pub u: Option<Vector>,
}

/// Formats one value with 17 significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse `{token}` as a decimal"),
    })?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            message: format!("non-finite value `{token}`"),
        });
    }
    Ok(v)
}

struct Lines<'a> {
    // (1-based line number, content) with comments and blanks removed.
    items: Vec<(usize, &'a str)>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let items = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
            .collect();
        Lines { items, next: 0 }
    }

    fn next_line(&mut self) -> Option<(usize, &'a str)> {
        let item = self.items.get(self.next).copied();
        self.next += 1;
        item
    }

    fn last_line_number(&self) -> usize {
        self.items.last().map_or(1, |&(n, _)| n + 1)
    }
}

fn parse_row(lines: &mut Lines<'_>, expected: usize, what: &str) -> Result<(usize, Vec<f64>)> {
    let (line, content) = lines.next_line().ok_or_else(|| Error::Parse {
        line: lines.last_line_number(),
        message: format!("unexpected end of file inside section {what}"),
    })?;
    let values: Vec<f64> = content
        .split_whitespace()
        .map(|tok| parse_value(tok, line))
        .collect::<Result<_>>()?;
    if values.len() != expected {
        return Err(Error::Parse {
            line,
            message: format!(
                "section {what}: expected {expected} values per line, got {}",
                values.len()
            ),
        });
    }
    Ok((line, values))
}

/// Parses problem text. See [`read_problem_file`] for the file variant.
pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    let mut lines = Lines::new(text);

    let (line, magic) = lines.next_line().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    if magic != FORMAT_MAGIC {
        return Err(Error::Parse {
            line,
            message: format!("expected `{FORMAT_MAGIC}`, found `{magic}`"),
        });
    }

    let (line, header) = lines.next_line().ok_or(Error::Parse {
        line: 2,
        message: "missing dimension line".into(),
    })?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>()[..] {
        ["n", dim] => dim.parse().map_err(|_| Error::Parse {
            line,
            message: format!("cannot parse dimension `{dim}`"),
        })?,
        _ => {
            return Err(Error::Parse {
                line,
                message: format!("expected `n <dim>`, found `{header}`"),
            })
        }
    };
    if n == 0 {
        return Err(Error::Parse {
            line,
            message: "dimension must be at least 1".into(),
        });
    }

    let mut q: Option<DenseMatrix> = None;
    let mut a: Option<DenseMatrix> = None;
    let mut b: Option<Vector> = None;
    let mut c: Option<f64> = None;
    let mut x0: Option<Vector> = None;
    let mut u: Option<Vector> = None;

    while let Some((line, header)) = lines.next_line() {
        let taken = match header {
            "Q" => q.is_some(),
            "A" => a.is_some(),
            "b" => b.is_some(),
            "c" => c.is_some(),
            "x0" => x0.is_some(),
            "u" => u.is_some(),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown section header `{other}`"),
                })
            }
        };
        if taken {
            return Err(Error::Parse {
                line,
                message: format!("duplicate section `{header}`"),
            });
        }
        match header {
            "Q" | "A" => {
                let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
                for _ in 0..n {
                    rows.push(parse_row(&mut lines, n, header)?.1);
                }
                let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
                let matrix = DenseMatrix::from_rows(&refs)
                    .map_err(|e| Error::InvalidProblem(e.to_string()))?;
                if header == "Q" {
                    q = Some(matrix);
                } else {
                    a = Some(matrix);
                }
            }
            "b" | "x0" | "u" => {
                let (row_line, values) = parse_row(&mut lines, n, header)?;
                let v = Vector::new(values).map_err(|_| Error::Parse {
                    line: row_line,
                    message: format!("invalid vector in section {header}"),
                })?;
                match header {
                    "b" => b = Some(v),
                    "x0" => x0 = Some(v),
                    _ => u = Some(v),
                }
            }
            "c" => {
                let (_, values) = parse_row(&mut lines, 1, "c")?;
                c = Some(values[0]);
            }
            _ => unreachable!(),
        }
    }

    let missing = |what: &str| Error::Parse {
        line: lines.last_line_number(),
        message: format!("missing required section `{what}`"),
    };
    let problem = QpProblem::new(
        q.ok_or_else(|| missing("Q"))?,
        b.ok_or_else(|| missing("b"))?,
        c.ok_or_else(|| missing("c"))?,
        a.ok_or_else(|| missing("A"))?,
    )?;
    Ok(ProblemFile { problem, x0, u })
}

fn push_matrix(out: &mut String, header: &str, m: &DenseMatrix) {
    out.push_str(header);
    out.push('\n');
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{}", format_value(m.get(i, j)));
        }
        out.push('\n');
    }
}

fn push_vector(out: &mut String, header: &str, v: &Vector) {
    out.push_str(header);
    out.push('\n');
    for i in 0..v.len() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{}", format_value(v[i]));
    }
    out.push('\n');
}

/// Renders a problem (plus optional extra sections) to format text.
pub fn render_problem(p: &QpProblem, x0: Option<&Vector>, u: Option<&Vector>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{FORMAT_MAGIC}");
    let _ = writeln!(out, "n {}", p.dim());
    push_matrix(&mut out, "Q", p.hessian());
    push_matrix(&mut out, "A", p.cone_matrix());
    push_vector(&mut out, "b", p.linear_term());
    out.push_str("c\n");
    let _ = writeln!(out, "{}", format_value(p.constant_term()));
    if let Some(x0) = x0 {
        push_vector(&mut out, "x0", x0);
    }
    if let Some(u) = u {
        push_vector(&mut out, "u", u);
    }
    out
}

/// Renders a generated instance with its metadata comment block and the
/// planted solution and starting point appended as sections.
pub fn render_generated(inst: &GeneratedInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "# beta={} seed={} norm_M={}",
        format_value(inst.beta()),
        inst.seed(),
        format_value(inst.norm_m())
    );
    out.push_str(&render_problem(
        inst.problem(),
        Some(inst.x0()),
        Some(inst.planted_solution()),
    ));
    out
}

/// Reads and validates a problem file from disk.
pub fn read_problem_file(path: &Path) -> Result<ProblemFile> {
    let text = std::fs::read_to_string(path)?;
    parse_problem(&text)
}

/// Reads a problem, discarding any optional sections.
pub fn read_problem(path: &Path) -> Result<QpProblem> {
    Ok(read_problem_file(path)?.problem)
}

/// Writes a problem to disk in format text.
pub fn write_problem(p: &QpProblem, path: &Path) -> Result<()> {
    std::fs::write(path, render_problem(p, None, None))?;
    Ok(())
}

/// Writes a generated instance to disk, metadata included.
pub fn write_generated(inst: &GeneratedInstance, path: &Path) -> Result<()> {
    std::fs::write(path, render_generated(inst))?;
    Ok(())
}
