//! Text format for realizations.
//!
//! ```text
//! #sfp-box v1
//! d=1 alpha=1.5 lambda=1 tau=2.5 model=sfp L=4 seed=0
//! w 0 1.7320508075688772
//! ...
//! e 0 2
//! ...
//! #end
//! ```
//!
//! A truncated realization adds `trunc=<R> bias=<bound>` to the header, and a
//! box away from the origin adds `origin=<c1>,...,<cd>`. Reals use Rust's
//! shortest round-trip formatting, so saving and loading is bit-exact. The
//! `#end` trailer makes a file cut at a line boundary detectable.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{BoxRealization, GraphError, Truncation};
use crate::lattice::{BoxSpec, Vertex};
use crate::params::{ModelKind, ModelParams};

pub const FORMAT_HEADER: &str = "#sfp-box v1";
const TRAILER: &str = "#end";

pub fn write_realization<W: Write>(r: &BoxRealization, mut out: W) -> std::io::Result<()> {
    let p = r.params();
    let spec = r.spec();
    writeln!(out, "{FORMAT_HEADER}")?;
    write!(
        out,
        "d={} alpha={} lambda={} tau={} model={} L={} seed={}",
        p.d(),
        p.alpha(),
        p.lambda(),
        p.tau(),
        p.kind(),
        spec.side(),
        r.seed()
    )?;
    if let Some(t) = r.truncation() {
        write!(out, " trunc={} bias={}", t.radius, t.bias_bound)?;
    }
    if spec.origin().coords().iter().any(|&c| c != 0) {
        let o: Vec<String> = spec.origin().coords().iter().map(|c| c.to_string()).collect();
        write!(out, " origin={}", o.join(","))?;
    }
    writeln!(out)?;
    let d = spec.d() as usize;
    let mut c = vec![0i64; d];
    if let Some(w) = r.weights() {
        for (i, wi) in w.iter().enumerate() {
            spec.write_coords(i, &mut c);
            out.write_all(b"w")?;
            for x in &c {
                write!(out, " {x}")?;
            }
            writeln!(out, " {wi}")?;
        }
    }
    let mut c2 = vec![0i64; d];
    for (a, b) in r.edges() {
        spec.write_coords(a, &mut c);
        spec.write_coords(b, &mut c2);
        out.write_all(b"e")?;
        for x in c.iter().chain(&c2) {
            write!(out, " {x}")?;
        }
        writeln!(out)?;
    }
    writeln!(out, "{TRAILER}")?;
    out.flush()
}

pub fn save_realization(r: &BoxRealization, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let f = File::create(path)?;
    write_realization(r, BufWriter::new(f))?;
    Ok(())
}

pub fn load_realization(path: impl AsRef<Path>) -> Result<BoxRealization, GraphError> {
    read_realization(BufReader::new(File::open(path)?))
}

fn perr(line: usize, message: impl Into<String>) -> GraphError {
    GraphError::ParseError { line, message: message.into() }
}

struct Header {
    d: u32,
    alpha: f64,
    lambda: f64,
    tau: f64,
    kind: ModelKind,
    side: u64,
    seed: u64,
    trunc: Option<f64>,
    bias: Option<f64>,
    origin: Option<Vec<i64>>,
}

fn parse_header(line: &str, ln: usize) -> Result<Header, GraphError> {
    let (mut d, mut alpha, mut lambda, mut tau, mut kind, mut side, mut seed) = (None, None, None, None, None, None, None);
    let (mut trunc, mut bias, mut origin) = (None, None, None);
    for tok in line.split_ascii_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| perr(ln, format!("expected key=value, got `{tok}`")))?;
        let bad = |_| perr(ln, format!("bad value for `{k}`: `{v}`"));
        match k {
            "d" => d = Some(v.parse::<u32>().map_err(|e| bad(e.to_string()))?),
            "alpha" => alpha = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "lambda" => lambda = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "tau" => tau = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "model" => kind = Some(v.parse::<ModelKind>().map_err(|e| bad(e.to_string()))?),
            "L" => side = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            "seed" => seed = Some(v.parse::<u64>().map_err(|e| bad(e.to_string()))?),
            "trunc" => trunc = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "bias" => bias = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "origin" => {
                let c: Result<Vec<i64>, _> = v.split(',').map(str::parse::<i64>).collect();
                origin = Some(c.map_err(|e| bad(e.to_string()))?);
            }
            _ => return Err(perr(ln, format!("unknown header key `{k}`"))),
        }
    }
    let need = |name: &str| perr(ln, format!("missing header key `{name}`"));
    Ok(Header {
        d: d.ok_or_else(|| need("d"))?,
        alpha: alpha.ok_or_else(|| need("alpha"))?,
        lambda: lambda.ok_or_else(|| need("lambda"))?,
        tau: tau.ok_or_else(|| need("tau"))?,
        kind: kind.ok_or_else(|| need("model"))?,
        side: side.ok_or_else(|| need("L"))?,
        seed: seed.ok_or_else(|| need("seed"))?,
        trunc,
        bias,
        origin,
    })
}

pub fn read_realization<R: BufRead>(input: R) -> Result<BoxRealization, GraphError> {
    let mut lines = input.lines();
    let mut ln = 0usize;
    let mut next = |ln: &mut usize| -> Result<Option<String>, GraphError> {
        *ln += 1;
        lines.next().transpose().map_err(GraphError::from)
    };

    let first = next(&mut ln)?.ok_or_else(|| perr(1, "empty file"))?;
    if first != FORMAT_HEADER {
        if let Some(v) = first.strip_prefix("#sfp-box ") {
            return Err(GraphError::FormatVersionMismatch(v.trim().to_string()));
        }
        return Err(perr(1, "missing `#sfp-box v1` header"));
    }
    let hline = next(&mut ln)?.ok_or_else(|| perr(2, "missing parameter line"))?;
    let h = parse_header(&hline, 2)?;
    let params = ModelParams::new(h.d, h.alpha, h.lambda, h.tau, h.kind).map_err(|e| perr(2, e.to_string()))?;
    let origin = Vertex::from(h.origin.unwrap_or_else(|| vec![0; h.d as usize]));
    let spec = BoxSpec::with_origin(h.d, h.side, origin).map_err(|e| perr(2, e.to_string()))?;
    let truncation = match (h.trunc, h.bias) {
        (None, None) => None,
        (Some(radius), Some(bias_bound)) => Some(Truncation { radius, bias_bound }),
        _ => return Err(perr(2, "`trunc` and `bias` must appear together")),
    };

    let d = h.d as usize;
    let n = spec.vertex_count();
    let mut weights: Option<Vec<f64>> = None;
    let mut seen = 0usize;
    let mut edges: Vec<(u32, u32)> = Vec::new();
    let mut coords = vec![0i64; 2 * d];
    let mut ended = false;
    while let Some(line) = next(&mut ln)? {
        if ended {
            if line.trim().is_empty() {
                continue;
            }
            return Err(perr(ln, "content after `#end`"));
        }
        if line == TRAILER {
            ended = true;
            continue;
        }
        let mut toks = line.split_ascii_whitespace();
        let tag = toks.next().ok_or_else(|| perr(ln, "empty line"))?;
        let ncoord = match tag {
            "w" => d,
            "e" => 2 * d,
            _ => return Err(perr(ln, format!("unknown record `{tag}`"))),
        };
        for c in coords.iter_mut().take(ncoord) {
            let t = toks.next().ok_or_else(|| perr(ln, "too few fields"))?;
            *c = t.parse().map_err(|_| perr(ln, format!("bad coordinate `{t}`")))?;
        }
        let index = |c: &[i64]| spec.index_of(c).ok_or_else(|| perr(ln, "vertex outside the box"));
        if tag == "w" {
            if !h.kind.has_weights() {
                return Err(perr(ln, "weight record in an LRP realization"));
            }
            let t = toks.next().ok_or_else(|| perr(ln, "missing weight"))?;
            let w: f64 = t.parse().map_err(|_| perr(ln, format!("bad weight `{t}`")))?;
            let i = index(&coords[..d])?;
            let ws = weights.get_or_insert_with(|| vec![f64::NAN; n]);
            if !ws[i].is_nan() {
                return Err(perr(ln, "duplicate weight record"));
            }
            ws[i] = w;
            seen += 1;
        } else {
            let a = index(&coords[..d])?;
            let b = index(&coords[d..2 * d])?;
            if a == b {
                return Err(perr(ln, "self-loop"));
            }
            edges.push((a.min(b) as u32, a.max(b) as u32));
        }
        if toks.next().is_some() {
            return Err(perr(ln, "too many fields"));
        }
    }
    if !ended {
        return Err(perr(ln, "unexpected end of file (missing `#end`)"));
    }
    if h.kind.has_weights() && seen != n {
        return Err(perr(ln, format!("expected {n} weight records, found {seen}")));
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(BoxRealization::from_sorted_edges(spec, params, h.seed, weights, &edges, truncation))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_box, generate_box_truncated};

    fn roundtrip(r: &BoxRealization) -> BoxRealization {
        let mut buf = Vec::new();
        write_realization(r, &mut buf).unwrap();
        read_realization(buf.as_slice()).unwrap()
    }

    #[test]
    fn roundtrip_is_exact() {
        let p = ModelParams::new(2, 2.5, 1.3, 2.7, ModelKind::Sfp).unwrap();
        let spec = BoxSpec::with_origin(2, 9, Vertex::new(&[4, -2])).unwrap();
        let r = generate_box(&p, 17, &spec).unwrap();
        assert_eq!(roundtrip(&r), r);
        let t = generate_box_truncated(&p.with_kind(ModelKind::Lrp), 3, &spec, 2.5).unwrap();
        assert_eq!(roundtrip(&t), t);
    }

    #[test]
    fn version_and_truncation_errors() {
        let bad = "#sfp-box v2\nd=1 alpha=1 lambda=1 tau=2 model=lrp L=2 seed=0\n#end\n";
        assert!(matches!(read_realization(bad.as_bytes()), Err(GraphError::FormatVersionMismatch(v)) if v == "v2"));

        let p = ModelParams::new(1, 1.5, 1.0, 2.5, ModelKind::Sfp).unwrap();
        let r = generate_box(&p, 0, &BoxSpec::new(1, 20).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_realization(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(10).map(|l| format!("{l}\n")).collect();
        match read_realization(cut.as_bytes()) {
            Err(GraphError::ParseError { line, .. }) => assert_eq!(line, 11),
            other => panic!("unexpected {other:?}"),
        }
        let mid = &text[..text.len() - 9];
        assert!(matches!(read_realization(mid.as_bytes()), Err(GraphError::ParseError { .. })));
    }
}
