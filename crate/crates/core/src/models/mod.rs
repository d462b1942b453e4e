//! The classifier itself: the fixed character vocabulary, the registry of
//! output states, the 2-layer recurrent network with its projection head,
//! and the binary model-file container.

mod net;
mod registry;
mod serial;
mod vocab;

pub use net::{ModelMeta, NameForward, RecurrentModel};
pub use registry::StateRegistry;
pub use serial::{load_checkpoint, load_model, save_checkpoint, save_model, write_atomic};
pub use vocab::{Vocabulary, PAD, UNK, VOCAB_SIZE};
