//! Consistent labels: the helper replays every edge with a label on each
//! endpoint, after listing each node once with its label and degree. The
//! verifier checks, with four fingerprints, that the replay is the stream's
//! edge multiset and that every endpoint occurrence carries its node's label.

use crate::annotation::{AnnHeader, AnnToken, Annotation, Tag};
use crate::field::{Fe, PrimeField};
use crate::fingerprint::{DomainEncoder, Fingerprint, FINGERPRINT_WORDS};
use crate::graph::Graph;
use crate::protocol::{ensure, reject, Outcome, Reason, Reject, Verifier};
use crate::stream::{StreamHeader, StreamToken};
use rand::Rng;

/// Reusable checker for label-augmented edge lists. Client protocols feed it
/// rows as they parse their own tokens.
#[derive(Debug, Clone)]
pub struct LabelChecker {
    n: u64,
    directed: bool,
    lmax: u64,
    pairs: DomainEncoder,
    fp_stream: Fingerprint,
    fp_replay: Fingerprint,
    fp_nodes: Fingerprint,
    fp_seen: Fingerprint,
    last_node: u64,
    node_rows: u64,
    expect_all: bool,
    closed: bool,
}

impl LabelChecker {
    pub fn new(field: PrimeField, alpha: Fe, n: u64, directed: bool) -> Result<Self, Reject> {
        let q = n.checked_mul(n).ok_or_else(|| Reject::new(Reason::Domain, "n^2 overflows"))?;
        let fp_stream = Fingerprint::new(field, alpha, q)?;
        let mut out = Self {
            n,
            directed,
            lmax: 0,
            pairs: DomainEncoder::IndexedTuple { bounds: vec![n, 1] },
            fp_stream,
            fp_replay: fp_stream,
            fp_nodes: fp_stream,
            fp_seen: fp_stream,
            last_node: 0,
            node_rows: 0,
            expect_all: true,
            closed: false,
        };
        out.set_lmax(n)?;
        Ok(out)
    }

    /// Draws a fresh secret point.
    pub fn random<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, n: u64, directed: bool) -> Result<Self, Reject> {
        Self::new(field, field.random_nonzero(rng), n, directed)
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn lmax(&self) -> u64 {
        self.lmax
    }

    /// Sets the label bound. Only allowed before any row arrives.
    pub fn set_lmax(&mut self, lmax: u64) -> Result<(), Reject> {
        ensure(self.node_rows == 0, Reason::Structure, || "label bound set after rows".into())?;
        let width = lmax.checked_add(1).ok_or_else(|| Reject::new(Reason::Domain, "label bound overflows"))?;
        self.pairs = DomainEncoder::IndexedTuple { bounds: vec![self.n, width] };
        let q = self.pairs.domain().ok_or_else(|| Reject::new(Reason::Domain, "label domain overflows"))?;
        let field = self.fp_stream.field();
        self.fp_nodes = Fingerprint::new(field, self.fp_stream.alpha(), q)?;
        self.fp_seen = self.fp_nodes;
        self.lmax = lmax;
        Ok(())
    }

    fn edge_item(&self, u: u64, v: u64) -> Result<u64, Reject> {
        let (a, b) = if self.directed || u <= v { (u, v) } else { (v, u) };
        Ok(DomainEncoder::EdgePair { n: self.n }.encode(&[a, b])?)
    }

    fn pair_item(&self, v: u64, l: u64) -> Result<u64, Reject> {
        ensure(l <= self.lmax, Reason::Domain, || format!("label {l} exceeds bound {}", self.lmax))?;
        Ok(self.pairs.encode(&[v, l + 1])?)
    }

    pub fn stream_edge(&mut self, u: u64, v: u64) -> Result<(), Reject> {
        let item = self.edge_item(u, v)?;
        self.fp_stream.update(item, 1)?;
        Ok(())
    }

    /// Node rows may cover any subset of `[1, n]` (used for components).
    pub fn subset_mode(mut self) -> Self {
        self.expect_all = false;
        self
    }

    /// Starts a fresh node/label section, keeping the edge fingerprints.
    pub fn reset_labels(&mut self) {
        self.fp_nodes = self.fp_nodes.empty_like();
        self.fp_seen = self.fp_seen.empty_like();
        self.last_node = 0;
        self.node_rows = 0;
        self.closed = false;
    }

    pub fn node_rows(&self) -> u64 {
        self.node_rows
    }

    /// A node row. Rows must arrive in strictly increasing node order.
    pub fn node(&mut self, v: u64, l: u64, deg: u64) -> Result<(), Reject> {
        ensure(!self.closed, Reason::Structure, || format!("node row {v} after edge rows"))?;
        ensure(v > self.last_node, Reason::Structure, || format!("node row {v} out of order"))?;
        ensure(v <= self.n, Reason::Domain, || format!("node {v} exceeds n"))?;
        let item = self.pair_item(v, l)?;
        let field = self.fp_nodes.field();
        self.fp_nodes.update_fe(item, field.from_u64(deg))?;
        self.last_node = v;
        self.node_rows += 1;
        Ok(())
    }

    /// Ends the node rows. With `expect_all`, every node must have had a row.
    pub fn close_nodes(&mut self) -> Result<(), Reject> {
        if !self.closed {
            ensure(!self.expect_all || self.node_rows == self.n, Reason::Structure, || {
                format!("{} node rows for {} nodes", self.node_rows, self.n)
            })?;
            self.closed = true;
        }
        Ok(())
    }

    /// An edge row; closes the node rows.
    pub fn edge(&mut self, u: u64, v: u64, lu: u64, lv: u64) -> Result<(), Reject> {
        self.close_nodes()?;
        let item = self.edge_item(u, v)?;
        self.fp_replay.update(item, 1)?;
        let (iu, iv) = (self.pair_item(u, lu)?, self.pair_item(v, lv)?);
        self.fp_seen.update(iu, 1)?;
        self.fp_seen.update(iv, 1)?;
        Ok(())
    }

    /// A labelled node occurrence outside any edge row.
    pub fn occurrence(&mut self, v: u64, l: u64) -> Result<(), Reject> {
        self.close_nodes()?;
        let item = self.pair_item(v, l)?;
        self.fp_seen.update(item, 1)?;
        Ok(())
    }

    /// Replays an edge without labels (no node rows needed).
    pub fn replay_unlabeled(&mut self, u: u64, v: u64) -> Result<(), Reject> {
        let item = self.edge_item(u, v)?;
        self.fp_replay.update(item, 1)?;
        Ok(())
    }

    /// Only the edge-multiset check.
    pub fn check_edges(&self) -> Result<(), Reject> {
        ensure(self.fp_replay.acc() == self.fp_stream.acc(), Reason::EdgesMismatch, || {
            "replayed edges differ from the stream".into()
        })
    }

    /// Only the label-consistency check.
    pub fn check_labels(&mut self) -> Result<(), Reject> {
        self.close_nodes()?;
        ensure(self.fp_nodes.acc() == self.fp_seen.acc(), Reason::LabelsInconsistent, || {
            "endpoint labels disagree with node rows".into()
        })
    }

    pub fn finish(&mut self) -> Result<(), Reject> {
        self.check_labels()?;
        self.check_edges()
    }

    pub const WORDS: usize = 4 * FINGERPRINT_WORDS + 8;

    pub fn words(&self) -> usize {
        Self::WORDS
    }
}

/// Stand-alone protocol: accepts exactly the valid label-augmented lists.
pub struct LabelsVerifier {
    check: LabelChecker,
}

impl LabelsVerifier {
    pub fn new<R: Rng + ?Sized>(field: PrimeField, rng: &mut R, header: &StreamHeader) -> Result<Self, Reject> {
        Ok(Self { check: LabelChecker::random(field, rng, header.n, header.kind.is_directed())? })
    }
}

impl Verifier for LabelsVerifier {
    fn stream(&mut self, tok: &StreamToken) -> Result<(), Reject> {
        match *tok {
            StreamToken::Edge(u, v) | StreamToken::DirectedEdge(u, v) => self.check.stream_edge(u, v),
            _ => reject(Reason::Structure, "labels expects an edge stream"),
        }
    }

    fn annotation_header(&mut self, header: &AnnHeader) -> Result<(), Reject> {
        if let Some(l) = header.get("lmax") {
            ensure(l >= 0, Reason::Domain, || "negative label bound".into())?;
            self.check.set_lmax(l as u64)?;
        }
        Ok(())
    }

    fn annotation(&mut self, tok: &AnnToken) -> Result<(), Reject> {
        let n = self.check.n();
        match tok.tag {
            Tag::NodeRow => {
                tok.expect_len(3)?;
                self.check.node(tok.node(0, n)?, tok.int_in(1, 0, i64::MAX)? as u64, tok.int_in(2, 0, i64::MAX)? as u64)
            }
            Tag::EdgeRow => {
                tok.expect_len(4)?;
                let (u, v) = (tok.node(0, n)?, tok.node(1, n)?);
                self.check.edge(u, v, tok.int_in(2, 0, i64::MAX)? as u64, tok.int_in(3, 0, i64::MAX)? as u64)
            }
            other => reject(Reason::Structure, format!("unexpected {} token", other.as_str())),
        }
    }

    fn finish(&mut self) -> Result<Outcome, Reject> {
        self.check.finish()?;
        Ok(Outcome::Accept)
    }

    fn words(&self) -> usize {
        self.check.words()
    }
}

/// Appends node rows (all of `1..=n`) and then edge rows in stream order.
/// `labels` is indexed by node with an unused slot 0.
pub fn push_label_rows(ann: &mut Annotation, g: &Graph, labels: &[u64]) {
    let deg = g.degrees();
    for v in 1..=g.n {
        ann.push_ints(Tag::NodeRow, &[v as i64, labels[v as usize] as i64, deg[v as usize] as i64]);
    }
    for &(u, v, _) in &g.edges {
        ann.push(AnnToken::ints(
            Tag::EdgeRow,
            &[u as i64, v as i64, labels[u as usize] as i64, labels[v as usize] as i64],
        ));
    }
}

pub fn prove_labels(g: &Graph, labels: &[u64], lmax: u64) -> Annotation {
    let mut ann = Annotation::new(AnnHeader::new("labels").with("lmax", lmax as i64));
    push_label_rows(&mut ann, g, labels);
    ann
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::run_in_memory;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(g: &Graph, ann: &Annotation, seed: u64) -> Outcome {
        let s = g.to_stream();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v = LabelsVerifier::new(PrimeField::default(), &mut rng, &s.header).unwrap();
        run_in_memory(&mut v, &s, ann).0
    }

    #[test]
    fn path_accepts() {
        let g = Graph::from_pairs(3, false, &[(1, 2), (2, 3)]);
        let ann = prove_labels(&g, &[0, 0, 1, 2], 3);
        assert_eq!(ann.tokens.len(), 5);
        assert_eq!(run(&g, &ann, 1), Outcome::Accept);
    }

    #[test]
    fn self_loop_counts_twice() {
        let g = Graph::from_pairs(1, false, &[(1, 1)]);
        let ann = prove_labels(&g, &[0, 4], 5);
        assert_eq!(ann.tokens[0], AnnToken::ints(Tag::NodeRow, &[1, 4, 2]));
        assert_eq!(ann.tokens[1], AnnToken::ints(Tag::EdgeRow, &[1, 1, 4, 4]));
        assert_eq!(run(&g, &ann, 2), Outcome::Accept);
    }

    #[test]
    fn empty_graph() {
        let g = Graph::new(0, false);
        let ann = prove_labels(&g, &[0], 0);
        assert!(ann.tokens.is_empty());
        assert_eq!(run(&g, &ann, 3), Outcome::Accept);
    }

    #[test]
    fn inconsistent_label_and_missing_edge_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::graph::connected_gnm(&mut rng, 8, 12).unwrap();
        let labels: Vec<u64> = (0..=8).map(|_| rng.gen_range(0..5)).collect();
        let honest = prove_labels(&g, &labels, 5);
        let mut bumped = honest.clone();
        let k = bumped.tokens.iter().position(|t| t.tag == Tag::EdgeRow).unwrap();
        let lu = bumped.tokens[k].int(2).unwrap();
        bumped.tokens[k].args[2] = crate::annotation::Num::Int(lu + 1);
        let mut dropped = honest.clone();
        dropped.tokens.pop();
        for seed in 0..500 {
            match run(&g, &bumped, seed) {
                Outcome::Bottom(r) => assert_eq!(r.reason, Reason::LabelsInconsistent),
                o => panic!("accepted {o:?}"),
            }
            assert!(run(&g, &dropped, seed).is_bottom());
        }
    }

    #[test]
    fn unsorted_nodes_rejected() {
        let g = Graph::from_pairs(3, false, &[(1, 2), (2, 3)]);
        let mut ann = prove_labels(&g, &[0, 0, 1, 2], 3);
        ann.tokens.swap(0, 1);
        match run(&g, &ann, 0) {
            Outcome::Bottom(r) => assert_eq!(r.reason, Reason::Structure),
            o => panic!("{o:?}"),
        }
    }
}
