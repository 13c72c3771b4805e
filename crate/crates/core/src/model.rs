//! Trained model and its text serialization.
//!
//! Layout (one item per line, values space-separated, floats with 17
//! significant digits):
//!
//! ```text
//! sdprel-model 1
//! regime <blind_2k1|sighted|sighted_ns>
//! strategy <blind|sighted|dual>
//! mode <lcnn|cnn>
//! relations <R>
//! <relation name>            × R
//! hyperparams <d> <w> <n1> <n2> <K> <f>
//! lambdas <we> <w1> <w2> <w3>
//! vocab <|V|>
//! <w|n><TAB><node>           × |V|   (w = occurs as a word)
//! We <|V|> <d>               then |V| lines, one embedding column each
//! W1 <n1> <d·w>              then n1 rows
//! b1 1 <n1>
//! W2 <n2> <n1>
//! b2 1 <n2>
//! W3 <K> <n2+f>
//! b3 1 <K>
//! end
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::corpus::LabelSet;
use crate::deppath::PathMode;
use crate::embeddings::{EmbeddingTable, Vocab};
use crate::error::{Error, Result};
use crate::infer_eval::EvalStrategy;
use crate::linalg::Matrix;
use crate::network::{Hyperparams, Lambdas, NetworkParams};
use crate::scalar::Scalar;
use crate::training::Regime;

pub const FORMAT_TAG: &str = "sdprel-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Model<T> {
    pub regime: Regime,
    pub strategy: EvalStrategy,
    pub mode: PathMode,
    pub labels: LabelSet,
    pub vocab: Vocab,
    pub hp: Hyperparams,
    pub params: NetworkParams<T>,
}

fn write_row<T: Scalar>(out: &mut String, values: &[T]) {
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "{v:.16e}");
    }
    out.push('\n');
}

fn write_matrix<T: Scalar>(out: &mut String, name: &str, rows: usize, cols: usize, data: &[T]) {
    let _ = writeln!(out, "{name} {rows} {cols}");
    for r in 0..rows {
        write_row(out, &data[r * cols..(r + 1) * cols]);
    }
}

impl<T: Scalar> Model<T> {
    pub fn to_text(&self) -> String {
        let hp = &self.hp;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG} {FORMAT_VERSION}");
        let _ = writeln!(out, "regime {}", self.regime);
        let _ = writeln!(out, "strategy {}", self.strategy);
        let _ = writeln!(out, "mode {}", self.mode);
        let _ = writeln!(out, "relations {}", self.labels.len());
        for r in self.labels.relations() {
            let _ = writeln!(out, "{r}");
        }
        let _ = writeln!(out, "hyperparams {} {} {} {} {} {}", hp.d, hp.w, hp.n1, hp.n2, hp.k, hp.f);
        let l = hp.lambdas;
        let _ = writeln!(out, "lambdas {:.16e} {:.16e} {:.16e} {:.16e}", l.we, l.w1, l.w2, l.w3);
        let _ = writeln!(out, "vocab {}", self.vocab.len());
        for (node, is_word) in self.vocab.entries() {
            let _ = writeln!(out, "{}\t{node}", if is_word { 'w' } else { 'n' });
        }
        let p = &self.params;
        write_matrix(&mut out, "We", p.we.columns(), p.we.dim(), p.we.as_slice());
        write_matrix(&mut out, "W1", p.w1.rows(), p.w1.cols(), p.w1.as_slice());
        write_matrix(&mut out, "b1", 1, p.b1.len(), &p.b1);
        write_matrix(&mut out, "W2", p.w2.rows(), p.w2.cols(), p.w2.as_slice());
        write_matrix(&mut out, "b2", 1, p.b2.len(), &p.b2);
        write_matrix(&mut out, "W3", p.w3.rows(), p.w3.cols(), p.w3.as_slice());
        write_matrix(&mut out, "b3", 1, p.b3.len(), &p.b3);
        out.push_str("end\n");
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Reader {
            lines: text.lines().enumerate(),
        };
        let header = r.fields(FORMAT_TAG)?;
        if header != [FORMAT_VERSION.to_string()] {
            return Err(Error::Format(format!("unsupported model format version {header:?}")));
        }
        let regime: Regime = r.single("regime")?.parse()?;
        let strategy: EvalStrategy = r.single("strategy")?.parse()?;
        let mode: PathMode = r.single("mode")?.parse()?;
        let n_rel: usize = r.single("relations")?.parse().map_err(|_| r.bad("relation count"))?;
        let relations = (0..n_rel).map(|_| r.line().map(str::to_string)).collect::<Result<Vec<_>>>()?;
        let labels = LabelSet::new(relations)?;

        let dims = r.numbers::<usize>("hyperparams", 6)?;
        let lam = r.numbers::<f64>("lambdas", 4)?;
        let hp = Hyperparams {
            d: dims[0],
            w: dims[1],
            n1: dims[2],
            n2: dims[3],
            k: dims[4],
            f: dims[5],
            lambdas: Lambdas {
                we: lam[0],
                w1: lam[1],
                w2: lam[2],
                w3: lam[3],
            },
        };
        hp.validate()?;

        let n_vocab: usize = r.single("vocab")?.parse().map_err(|_| r.bad("vocabulary size"))?;
        let mut entries = Vec::with_capacity(n_vocab);
        for _ in 0..n_vocab {
            let line = r.line()?;
            let (kind, node) = line.split_once('\t').ok_or_else(|| r.bad("vocabulary entry"))?;
            entries.push((node.to_string(), kind == "w"));
        }
        let vocab = Vocab::from_entries(entries)?;

        let we = r.matrix::<T>("We", n_vocab, hp.d)?;
        let w1 = r.matrix::<T>("W1", hp.n1, hp.d_w())?;
        let b1 = r.matrix::<T>("b1", 1, hp.n1)?;
        let w2 = r.matrix::<T>("W2", hp.n2, hp.n1)?;
        let b2 = r.matrix::<T>("b2", 1, hp.n2)?;
        let w3 = r.matrix::<T>("W3", hp.k, hp.n2 + hp.f)?;
        let b3 = r.matrix::<T>("b3", 1, hp.k)?;
        r.fields("end")?;

        let params = NetworkParams {
            we: EmbeddingTable::from_columns(hp.d, we)?,
            w1: Matrix::from_vec(hp.n1, hp.d_w(), w1),
            b1,
            w2: Matrix::from_vec(hp.n2, hp.n1, w2),
            b2,
            w3: Matrix::from_vec(hp.k, hp.n2 + hp.f, w3),
            b3,
        };
        if hp.k != labels.num_classes(regime.scheme()) {
            return Err(Error::Format(format!("{} classes do not fit regime {regime} with {n_rel} relations", hp.k)));
        }
        Ok(Model {
            regime,
            strategy,
            mode,
            labels,
            vocab,
            hp,
            params,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_text(&text)
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn bad(&self, what: &str) -> Error {
        Error::Format(format!("model file: bad {what}"))
    }

    fn line(&mut self) -> Result<&'a str> {
        self.lines
            .next()
            .map(|(_, l)| l)
            .ok_or_else(|| Error::Format("model file truncated".into()))
    }

    /// Fields after the expected leading keyword.
    fn fields(&mut self, keyword: &str) -> Result<Vec<String>> {
        let line = self.line()?;
        let mut parts = line.split_whitespace();
        if parts.next() != Some(keyword) {
            return Err(Error::Format(format!("model file: expected `{keyword}`, found {line:?}")));
        }
        Ok(parts.map(str::to_string).collect())
    }

    fn single(&mut self, keyword: &str) -> Result<String> {
        let mut f = self.fields(keyword)?;
        if f.len() != 1 {
            return Err(self.bad(keyword));
        }
        Ok(f.remove(0))
    }

    fn numbers<N: std::str::FromStr>(&mut self, keyword: &str, n: usize) -> Result<Vec<N>> {
        let f = self.fields(keyword)?;
        if f.len() != n {
            return Err(self.bad(keyword));
        }
        f.iter().map(|v| v.parse().map_err(|_| self.bad(keyword))).collect()
    }

    fn matrix<T: Scalar>(&mut self, name: &str, rows: usize, cols: usize) -> Result<Vec<T>> {
        let dims = self.numbers::<usize>(name, 2)?;
        if dims != [rows, cols] {
            return Err(Error::Format(format!("model file: {name} is {}×{}, expected {rows}×{cols}", dims[0], dims[1])));
        }
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            let line = self.line()?;
            let before = data.len();
            for v in line.split_whitespace() {
                data.push(v.parse::<T>().map_err(|_| self.bad(name))?);
            }
            if data.len() - before != cols {
                return Err(self.bad(name));
            }
        }
        Ok(data)
    }
}
