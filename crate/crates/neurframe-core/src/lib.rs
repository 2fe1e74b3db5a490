//! Continuous octahedral frame fields over tetrahedralized volumes.
//!
//! A frame (three mutually orthogonal axis directions, identified with all
//! 24 relabelings) is encoded as the unit 9-vector of degree-4 spherical
//! harmonic coefficients of its symmetry function. The encoding turns frame
//! comparison into vector distance and boundary alignment into a linear
//! functional, which makes both differentiable and cheap to optimize.
//!
//! The crate provides the coefficient algebra ([`sh`]), the cube-symmetry
//! group and loop classification ([`octa`]), tet-mesh preprocessing
//! ([`mesh`]), a small sinusoidal network with exact reverse-mode gradients
//! ([`field`]), self-supervised training of the network as a volumetric
//! frame field ([`train`]), and analysis of the trained field: singularity
//! extraction, streamline tracing, and export formats ([`analysis`]).

pub mod analysis;
pub mod field;
pub mod frame;
pub mod mesh;
pub mod octa;
pub mod quadrature;
pub mod selfcheck;
pub mod sh;
pub mod train;

pub use analysis::{
    classify_singular_edges_discrete, discretize_volume_field, extract_singular_points,
    extract_surface_cross_field, load_frames, sample_frames, trace_streamline,
    trace_streamline_on_surface, write_cross_field, write_frames, write_singular_ply,
    AnalysisError, Cross, CrossField, DiscreteField, Domain, SingularEdge, SingularEdgeReport,
    SingularPoint, SingularPointSet, StopReason, Streamline, StreamlineOptions,
};
pub use field::{
    load_checkpoint, save_checkpoint, Adam, FieldError, ForwardRecord, FrameField, Gradients,
    Mat, Mlp,
};
pub use frame::{Frame, FrameError};
pub use mesh::{
    boundary_samples, build_dual_graph, detect_features, feature_distance, generate_primitive,
    load_tet_mesh, normalize_to_unit_box, preprocess, subdivide_multi_boundary_tets,
    BoundaryFace, BoundarySamples, DualEdge, DualGraph, FeatureSegment, FeatureSet, MeshError,
    NormalizeTransform, PreprocessedMesh, Primitive, TetMesh,
};
pub use octa::{loop_rotation, octahedral_matching, OctaRotation};
pub use selfcheck::{run_selfcheck, CheckReport};
pub use sh::project::{
    project_to_frame, project_to_frame_detailed, project_to_frame_lenient, Projection,
};
pub use sh::rotation::{align_row, rotation_to_z, shrot, y_rotation, z_rotation, ShRotation};
pub use sh::{
    align_residual, aligned_zonal_value, canonical_sh, evaluate_frame_function, frame_distance,
    frame_to_sh, sh_basis, ShError, ShVec,
};
pub use train::{
    csv_line, evaluate_losses, feature_weight, loss_and_grad, train, LossTerms, LossWeights,
    TrainConfig, TrainError, TrainReport, TrainingData, CSV_HEADER,
};
