//! Training-side weak supervision: pseudo labels from a pre-trained model,
//! the online proposal sampling policy, class taxonomies and reference loss
//! terms.

mod classes;
mod loss;
mod pseudo;
mod sampling;

pub use classes::{map_class, CharClass, ClassMode, Domain};
pub use loss::{
    apply_offsets, box_offsets, char_loss, line_loss_gradient, line_loss_ohem, line_loss_on_sample, ohem_sample,
    smooth_l1, LossBreakdown, OhemSample, DEFAULT_NEG_RATIO, EMPTY_POSITIVE_NEGATIVES, PROB_EPSILON,
};
pub use pseudo::{generate_pseudo_labels, CharBox, DetectionsFile, PseudoLabelSet, DEFAULT_T_PSEUDO};
pub use sampling::{box_polygon_intersects, sample_proposals, Proposal, SampleDecision, DEFAULT_MATCH_IOU};
