//! Update stream text format.
//!
//! ```text
//! # comment
//! matrix n | bipartite nL nR | graph n | weighted nL nR Wmax
//! prime p            (optional)
//! seed s             (optional)
//! set i j val        (matrix preprocessing)
//! + u v [w]          (graph preprocessing)
//! begin
//! entry i j val
//! col j z i1 v1 ... iz vz
//! + u v [w]
//! - u v
//! w u v weight
//! ```
//!
//! Indices are 1-based in the text and 0-based once parsed. Matrix values
//! are absolute assignments.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: index {index} outside 1..={bound}")]
    Dimension {
        line: usize,
        index: i64,
        bound: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Matrix {
        n: usize,
    },
    Bipartite {
        left: usize,
        right: usize,
    },
    Graph {
        n: usize,
    },
    Weighted {
        left: usize,
        right: usize,
        w_max: u64,
    },
}

impl Kind {
    pub fn name(&self) -> &'static str {
        match self {
            Kind::Matrix { .. } => "matrix",
            Kind::Bipartite { .. } => "bipartite",
            Kind::Graph { .. } => "graph",
            Kind::Weighted { .. } => "weighted",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Op {
    Entry {
        i: usize,
        j: usize,
        value: i64,
    },
    Column {
        j: usize,
        entries: Vec<(usize, i64)>,
    },
    Insert {
        u: usize,
        v: usize,
        w: Option<i64>,
    },
    Delete {
        u: usize,
        v: usize,
    },
    Weight {
        u: usize,
        v: usize,
        w: i64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UpdateStream {
    pub kind: Kind,
    pub prime: Option<u64>,
    pub seed: Option<u64>,
    pub setup: Vec<Op>,
    /// Updates with their 1-based source line.
    pub updates: Vec<(usize, Op)>,
}

struct Line<'a> {
    no: usize,
    words: Vec<&'a str>,
}

impl Line<'_> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.no,
            msg: msg.into(),
        }
    }

    fn arity(&self, n: usize) -> Result<(), ParseError> {
        if self.words.len() == n {
            Ok(())
        } else {
            Err(self.err(format!("`{}` takes {} arguments", self.words[0], n - 1)))
        }
    }

    fn int(&self, k: usize) -> Result<i64, ParseError> {
        let w = self
            .words
            .get(k)
            .ok_or_else(|| self.err("missing argument"))?;
        w.parse()
            .map_err(|_| self.err(format!("`{w}` is not an integer")))
    }

    fn count(&self, k: usize) -> Result<usize, ParseError> {
        let v = self.int(k)?;
        usize::try_from(v).map_err(|_| self.err(format!("`{v}` is negative")))
    }

    /// A 1-based index checked against `bound`, returned 0-based.
    fn index(&self, k: usize, bound: usize) -> Result<usize, ParseError> {
        let v = self.int(k)?;
        if v < 1 || v as u64 > bound as u64 {
            return Err(ParseError::Dimension {
                line: self.no,
                index: v,
                bound,
            });
        }
        Ok(v as usize - 1)
    }
}

fn parse_op(kind: Kind, line: &Line, setup: bool) -> Result<Op, ParseError> {
    let head = line.words[0];
    let (rows, cols) = match kind {
        Kind::Matrix { n } => (n, n),
        Kind::Bipartite { left, right } | Kind::Weighted { left, right, .. } => (left, right),
        Kind::Graph { n } => (n, n),
    };
    let is_matrix = matches!(kind, Kind::Matrix { .. });
    match head {
        "set" | "entry" if is_matrix && (head == "set") == setup => {
            line.arity(4)?;
            Ok(Op::Entry {
                i: line.index(1, rows)?,
                j: line.index(2, cols)?,
                value: line.int(3)?,
            })
        }
        "col" if is_matrix && !setup => {
            let j = line.index(1, cols)?;
            let z = line.count(2)?;
            line.arity(3 + 2 * z)?;
            let entries = (0..z)
                .map(|t| Ok((line.index(3 + 2 * t, rows)?, line.int(4 + 2 * t)?)))
                .collect::<Result<_, ParseError>>()?;
            Ok(Op::Column { j, entries })
        }
        "+" if !is_matrix => {
            let weighted = matches!(kind, Kind::Weighted { .. });
            if weighted {
                line.arity(4)?;
            } else if line.words.len() != 3 && line.words.len() != 4 {
                return Err(line.err("`+` takes 2 or 3 arguments"));
            }
            let w = if line.words.len() == 4 {
                Some(line.int(3)?)
            } else {
                None
            };
            if !weighted && w.is_some_and(|w| w != 1) {
                return Err(line.err("only weighted streams carry weights"));
            }
            Ok(Op::Insert {
                u: line.index(1, rows)?,
                v: line.index(2, cols)?,
                w,
            })
        }
        "-" if !is_matrix && !setup => {
            line.arity(3)?;
            Ok(Op::Delete {
                u: line.index(1, rows)?,
                v: line.index(2, cols)?,
            })
        }
        "w" if matches!(kind, Kind::Weighted { .. }) && !setup => {
            line.arity(4)?;
            Ok(Op::Weight {
                u: line.index(1, rows)?,
                v: line.index(2, cols)?,
                w: line.int(3)?,
            })
        }
        _ => Err(line.err(format!(
            "`{head}` is not valid {} in a {} stream",
            if setup {
                "before `begin`"
            } else {
                "after `begin`"
            },
            kind.name()
        ))),
    }
}

fn parse_kind(line: &Line) -> Result<Kind, ParseError> {
    match line.words[0] {
        "matrix" => {
            line.arity(2)?;
            Ok(Kind::Matrix { n: line.count(1)? })
        }
        "graph" => {
            line.arity(2)?;
            Ok(Kind::Graph { n: line.count(1)? })
        }
        "bipartite" => {
            line.arity(3)?;
            Ok(Kind::Bipartite {
                left: line.count(1)?,
                right: line.count(2)?,
            })
        }
        "weighted" => {
            line.arity(4)?;
            Ok(Kind::Weighted {
                left: line.count(1)?,
                right: line.count(2)?,
                w_max: line.count(3)? as u64,
            })
        }
        other => Err(line.err(format!("expected a header, found `{other}`"))),
    }
}

pub fn parse(text: &str) -> Result<UpdateStream, ParseError> {
    let mut lines = text.lines().enumerate().filter_map(|(k, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        (!words.is_empty()).then_some(Line { no: k + 1, words })
    });
    let first = lines.next().ok_or(ParseError::Syntax {
        line: 1,
        msg: "empty stream".into(),
    })?;
    let kind = parse_kind(&first)?;
    let mut stream = UpdateStream {
        kind,
        prime: None,
        seed: None,
        setup: Vec::new(),
        updates: Vec::new(),
    };
    let mut begun = false;
    for line in lines {
        match line.words[0] {
            "begin" if !begun => {
                line.arity(1)?;
                begun = true;
            }
            "prime" if !begun => {
                line.arity(2)?;
                stream.prime = Some(line.count(1)? as u64);
            }
            "seed" if !begun => {
                line.arity(2)?;
                stream.seed = Some(line.count(1)? as u64);
            }
            _ if begun => stream
                .updates
                .push((line.no, parse_op(kind, &line, false)?)),
            _ => stream.setup.push(parse_op(kind, &line, true)?),
        }
    }
    if !begun {
        return Err(ParseError::Syntax {
            line: text.lines().count().max(1),
            msg: "missing `begin`".into(),
        });
    }
    Ok(stream)
}
