//! Named random streams.
//!
//! Every stochastic draw is taken from a ChaCha12 stream keyed by the master
//! seed and selected by `(node, variable, iteration)`. The stream id packs
//! `iteration` into the high 40 bits, `node` into the next 23 bits and the
//! variable into the lowest bit, so distinct triples never share a stream as
//! long as `node < 2^23` and `iteration < 2^40`. Draw order inside a stream is
//! fixed, which makes traces independent of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variable {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamId {
    pub node: usize,
    pub variable: Variable,
    pub iteration: usize,
}

impl StreamId {
    pub fn new(node: usize, variable: Variable, iteration: usize) -> Self {
        Self {
            node,
            variable,
            iteration,
        }
    }

    pub fn packed(self) -> u64 {
        assert!(self.node < (1 << 23), "node index out of stream range");
        assert!(
            (self.iteration as u64) < (1u64 << 40),
            "iteration out of stream range"
        );
        let var = match self.variable {
            Variable::X => 0u64,
            Variable::Y => 1u64,
        };
        ((self.iteration as u64) << 24) | ((self.node as u64) << 1) | var
    }
}

/// Master seed that expands into named streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn stream(&self, id: StreamId) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.master);
        rng.set_stream(id.packed());
        rng
    }

    /// Auxiliary stream for draws that are not oracle noise (instance
    /// generation, probe matrices). Lives in the node range above any real node.
    pub fn auxiliary(&self, tag: usize) -> ChaCha12Rng {
        self.stream(StreamId::new((1 << 23) - 1, Variable::X, tag))
    }
}
