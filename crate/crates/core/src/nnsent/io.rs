//! Text model format.
//!
//! ```text
//! XLSENT-NN v1
//! config
//! d_ce 16
//! ...
//! end
//! vocab <n>            one word per line
//! embeddings <n> <d>   word v1 .. vd
//! clusters <n> <k>     word<TAB>id
//! dictionary <n> <src> <tgt>   (or `dictionary none`)
//! lexicon <n>          (or `lexicon none`)
//! matrix <name> <rows> <cols>
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so a reloaded model
//! predicts bit-identically.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{Dims, FeatureResources, Mat, ModelParams, SentimentModel, Vocab, BLOCK_NAMES};
use crate::align::Dictionary;
use crate::error::{read_to_string, write_string};
use crate::lexicon::WordLexicon;
use crate::xlingrep::{ClusterMap, EmbeddingTable};
use crate::{Error, Result};

pub const MODEL_HEADER: &str = "XLSENT-NN v1";

fn write_floats(out: &mut String, vals: &[f64]) {
    let mut first = true;
    for v in vals {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:?}");
    }
    out.push('\n');
}

impl SentimentModel {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let d = &self.dims;
        let _ = writeln!(out, "{MODEL_HEADER}\nconfig");
        for (k, v) in [("d_ce", d.d_ce), ("d_e", d.d_e), ("d_cc", d.d_cc), ("d_rec", d.d_rec), ("d_h", d.d_h)] {
            let _ = writeln!(out, "{k} {v}");
        }
        let _ = writeln!(out, "lexicon_feature {}\nend", u8::from(d.lexicon));

        let _ = writeln!(out, "vocab {}", self.vocab.words().len());
        for w in self.vocab.words() {
            let _ = writeln!(out, "{w}");
        }

        let emb = &self.resources.embeddings;
        let _ = writeln!(out, "embeddings {} {}", emb.len(), emb.dim());
        for (i, w) in emb.words().iter().enumerate() {
            out.push_str(w);
            out.push(' ');
            write_floats(&mut out, emb.row(i));
        }

        let cl = &self.resources.clusters;
        let _ = writeln!(out, "clusters {} {}", cl.len(), cl.k);
        for (w, c) in cl.iter() {
            let _ = writeln!(out, "{w}\t{c}");
        }

        match &self.resources.dictionary {
            Some(dict) => {
                let _ = writeln!(out, "dictionary {} {} {}", dict.len(), dict.pair.0, dict.pair.1);
                out.push_str(&dict.to_tsv());
            }
            None => out.push_str("dictionary none\n"),
        }
        match &self.resources.lexicon {
            Some(lex) => {
                let _ = writeln!(out, "lexicon {}", lex.len());
                out.push_str(&lex.to_tsv());
            }
            None => out.push_str("lexicon none\n"),
        }

        for (name, m) in BLOCK_NAMES.iter().zip(self.params.blocks()) {
            let _ = writeln!(out, "matrix {name} {} {}", m.rows, m.cols);
            for r in 0..m.rows {
                write_floats(&mut out, m.row(r));
            }
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_string(path, &self.to_text())
    }

    pub fn parse_text(contents: &str, path: &Path) -> Result<Self> {
        let mut c = Cursor { lines: contents.lines().collect(), pos: 0, path };
        if c.next()? != MODEL_HEADER {
            return Err(c.err("missing `XLSENT-NN v1` header"));
        }
        c.expect_word("config")?;
        let mut cfg = BTreeMap::new();
        loop {
            let line = c.next()?;
            if line == "end" {
                break;
            }
            let (k, v) = line.split_once(' ').ok_or_else(|| c.err("bad config line"))?;
            let v: usize = v.parse().map_err(|_| c.err("bad config value"))?;
            cfg.insert(k.to_string(), v);
        }
        let get = |k: &str| cfg.get(k).copied().ok_or_else(|| Error::parse(path, 0, format!("config lacks `{k}`")));
        let dims = Dims {
            d_ce: get("d_ce")?,
            d_e: get("d_e")?,
            d_cc: get("d_cc")?,
            d_rec: get("d_rec")?,
            d_h: get("d_h")?,
            lexicon: get("lexicon_feature")? != 0,
        };
        dims.validate()?;

        let n = c.header_count("vocab", 1)?[0];
        let mut words = Vec::with_capacity(n);
        for _ in 0..n {
            words.push(c.next()?.to_string());
        }
        let vocab = Vocab::new(words);

        let hdr = c.header_count("embeddings", 2)?;
        let (n, dim) = (hdr[0], hdr[1]);
        let mut ewords = Vec::with_capacity(n);
        let mut vecs = Vec::with_capacity(n * dim);
        for _ in 0..n {
            let line = c.next()?;
            let mut it = line.split(' ');
            ewords.push(it.next().unwrap_or_default().to_string());
            for v in it {
                vecs.push(v.parse::<f64>().map_err(|_| c.err("bad embedding value"))?);
            }
        }
        let embeddings = if n == 0 { EmbeddingTable::empty(dim) } else { EmbeddingTable::new(ewords, dim, vecs)? };

        let hdr = c.header_count("clusters", 2)?;
        let mut assignment = BTreeMap::new();
        for _ in 0..hdr[0] {
            let line = c.next()?;
            let (w, id) = line.split_once('\t').ok_or_else(|| c.err("bad cluster line"))?;
            assignment.insert(w.to_string(), id.parse().map_err(|_| c.err("bad cluster id"))?);
        }
        let clusters = ClusterMap::new(hdr[1], assignment)?;

        let line = c.next()?;
        let dictionary = if line == "dictionary none" {
            None
        } else {
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 || parts[0] != "dictionary" {
                return Err(c.err("expected dictionary section"));
            }
            let n: usize = parts[1].parse().map_err(|_| c.err("bad dictionary size"))?;
            let body = c.take(n)?.join("\n");
            Some(Dictionary::parse_tsv(&body, path, parts[2], parts[3])?)
        };

        let line = c.next()?;
        let lexicon = if line == "lexicon none" {
            None
        } else {
            let n: usize = line
                .strip_prefix("lexicon ")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| c.err("expected lexicon section"))?;
            let mut lex = WordLexicon::default();
            for row in c.take(n)? {
                let cols: Vec<&str> = row.split('\t').collect();
                let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::parse(path, 0, "bad lexicon score"));
                if cols.len() != 3 {
                    return Err(c.err("bad lexicon row"));
                }
                lex.insert(cols[0], parse(cols[1])?, parse(cols[2])?)?;
            }
            Some(lex)
        };

        let mut params = ModelParams::zeros(&dims, vocab.rows(), clusters.k + 1);
        for (name, block) in BLOCK_NAMES.iter().zip(params.blocks_mut()) {
            let line = c.next()?;
            let parts: Vec<&str> = line.split(' ').collect();
            if parts.len() != 4 || parts[0] != "matrix" || parts[1] != *name {
                return Err(c.err(format!("expected matrix `{name}`")));
            }
            let (rows, cols): (usize, usize) =
                (parts[2].parse().map_err(|_| c.err("bad rows"))?, parts[3].parse().map_err(|_| c.err("bad cols"))?);
            if rows != block.rows || cols != block.cols {
                return Err(c.err(format!("matrix `{name}` is {rows}x{cols}, expected {}x{}", block.rows, block.cols)));
            }
            let mut m = Mat::zeros(rows, cols);
            for r in 0..rows {
                let line = c.next()?;
                let vals: Vec<f64> = line
                    .split(' ')
                    .map(str::parse)
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| c.err("bad matrix value"))?;
                if vals.len() != cols {
                    return Err(c.err("wrong number of matrix values"));
                }
                m.row_mut(r).copy_from_slice(&vals);
            }
            *block = m;
        }

        let resources = FeatureResources { embeddings, clusters, dictionary, lexicon };
        if resources.embeddings.dim() != dims.d_ce {
            return Err(Error::Shape("embedding dimension differs from d_ce".into()));
        }
        Ok(SentimentModel { dims, resources, vocab, params })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse_text(&read_to_string(path)?, path)
    }
}

struct Cursor<'a> {
    lines: Vec<&'a str>,
    pos: usize,
    path: &'a Path,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, self.pos, msg)
    }

    fn next(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .copied()
            .ok_or_else(|| Error::parse(self.path, self.pos + 1, "unexpected end of model file"))?;
        self.pos += 1;
        Ok(line)
    }

    fn take(&mut self, n: usize) -> Result<Vec<&'a str>> {
        (0..n).map(|_| self.next()).collect()
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.next()? != w {
            return Err(self.err(format!("expected `{w}`")));
        }
        Ok(())
    }

    fn header_count(&mut self, name: &str, n: usize) -> Result<Vec<usize>> {
        let line = self.next()?;
        let parts: Vec<&str> = line.split(' ').collect();
        if parts.len() != n + 1 || parts[0] != name {
            return Err(self.err(format!("expected `{name}` section")));
        }
        parts[1..].iter().map(|p| p.parse().map_err(|_| self.err("bad count"))).collect()
    }
}
