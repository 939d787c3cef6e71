//! Seeded generator of CTB-style word-level trees for tests, benchmarks and
//! demos. Trees have a `TOP -> IP` root, words of one to five characters
//! drawn from a block of CJK ideographs, phrase fan-out of at most five, and
//! unary chains of at most three source labels.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::treebank::{SyntaxTree, TOP_LABEL};

const PHRASES: &[&str] = &["NP", "VP", "IP", "PP", "ADVP", "ADJP", "QP", "CP", "DNP", "LCP", "DP", "CLP"];
const TAGS: &[&str] = &[
    "NN", "NR", "VV", "AD", "P", "DEC", "DEG", "PU", "CD", "M", "JJ", "VA", "AS", "LC", "CC", "PN", "DT", "VC",
    "VE", "NT",
];

/// Word-length weights for lengths 1 to 5.
const WORD_LENGTH_WEIGHTS: [u32; 5] = [35, 45, 12, 6, 2];

#[derive(Clone, Debug)]
pub struct SynthConfig {
    pub seed: u64,
    pub min_words: usize,
    pub max_words: usize,
    /// Number of distinct characters, starting at U+4E00.
    pub alphabet: u32,
    /// Probability of wrapping a phrase in an extra unary parent.
    pub unary_rate: f64,
}

impl SynthConfig {
    /// Short sentences, 3 to 10 words.
    pub fn small(seed: u64) -> Self {
        SynthConfig {
            seed,
            min_words: 3,
            max_words: 10,
            alphabet: 800,
            unary_rate: 0.2,
        }
    }

    /// Long sentences, 3 to 63 words, about 60 characters on average.
    pub fn ctb_like(seed: u64) -> Self {
        SynthConfig {
            seed,
            min_words: 3,
            max_words: 63,
            alphabet: 3000,
            unary_rate: 0.2,
        }
    }
}

struct Generator {
    rng: ChaCha8Rng,
    config: SynthConfig,
}

impl Generator {
    fn word(&mut self) -> String {
        let total: u32 = WORD_LENGTH_WEIGHTS.iter().sum();
        let mut pick = self.rng.gen_range(0..total);
        let mut len = 1;
        for (k, w) in WORD_LENGTH_WEIGHTS.iter().enumerate() {
            if pick < *w {
                len = k + 1;
                break;
            }
            pick -= w;
        }
        (0..len)
            .map(|_| char::from_u32(0x4E00 + self.rng.gen_range(0..self.config.alphabet)).unwrap())
            .collect()
    }

    fn preterminal(&mut self) -> SyntaxTree {
        let tag = *TAGS.choose(&mut self.rng).unwrap();
        SyntaxTree::node(tag, vec![SyntaxTree::Leaf(self.word())])
    }

    /// Wraps `node` in up to `room` extra unary parents.
    fn wrap(&mut self, mut node: SyntaxTree, room: usize) -> SyntaxTree {
        for _ in 0..room {
            if !self.rng.gen_bool(self.config.unary_rate) {
                break;
            }
            let label = *PHRASES.choose(&mut self.rng).unwrap();
            node = SyntaxTree::node(label, vec![node]);
        }
        node
    }

    /// A constituent over `words` words.
    fn constituent(&mut self, words: usize) -> SyntaxTree {
        if words == 1 {
            let pre = self.preterminal();
            return if self.rng.gen_bool(0.5) {
                let label = *PHRASES.choose(&mut self.rng).unwrap();
                let np = SyntaxTree::node(label, vec![pre]);
                self.wrap(np, 1)
            } else {
                pre
            };
        }
        let label = *PHRASES.choose(&mut self.rng).unwrap();
        let children = self.split(words);
        let node = SyntaxTree::node(label, children);
        self.wrap(node, 2)
    }

    /// Children of a phrase over `words` words: fan-out 2 to 5.
    fn split(&mut self, words: usize) -> Vec<SyntaxTree> {
        let fanout = self.rng.gen_range(2..=5usize.min(words));
        // choose fanout-1 distinct cut points in 1..words
        let mut cuts: Vec<usize> = (1..words).collect();
        cuts.shuffle(&mut self.rng);
        let mut cuts: Vec<usize> = cuts.into_iter().take(fanout - 1).collect();
        cuts.sort_unstable();
        let mut sizes = Vec::with_capacity(fanout);
        let mut prev = 0;
        for c in cuts.into_iter().chain(std::iter::once(words)) {
            sizes.push(c - prev);
            prev = c;
        }
        sizes.into_iter().map(|s| self.constituent(s)).collect()
    }

    fn sentence(&mut self) -> SyntaxTree {
        let words = self.rng.gen_range(self.config.min_words..=self.config.max_words);
        let ip = if words == 1 {
            SyntaxTree::node("IP", vec![self.preterminal()])
        } else {
            SyntaxTree::node("IP", self.split(words))
        };
        SyntaxTree::node(TOP_LABEL, vec![ip])
    }
}

/// `count` trees drawn from `config`.
pub fn generate(count: usize, config: &SynthConfig) -> Vec<SyntaxTree> {
    let mut g = Generator {
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        config: config.clone(),
    };
    (0..count).map(|_| g.sentence()).collect()
}
