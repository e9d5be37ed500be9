"""Pose-keypoint motion and proximity features for two-class video
classification, with from-scratch classifiers and an evaluation harness."""

__version__ = "0.1.0"

from .classifiers import (
    BoostModel,
    ClassifierConfig,
    Dataset,
    ForestModel,
    KnnModel,
    TreeModel,
    gini,
    knn_predict,
    predict,
    predict_many,
    stage_weight,
    train_adaboost,
    train_forest,
    train_model,
    train_tree,
)
from .errors import (
    ConfigError,
    ContractViolation,
    DifemError,
    DimensionError,
    DuplicateFrameError,
    ParseError,
    SchemaError,
    StratificationError,
)
from .evaluation import (
    ConfusionMatrix,
    CvReport,
    EvaluationReport,
    confusion,
    evaluate_model,
    kfold_cv,
    metrics,
    stratified_fold_assignment,
)
from .features import (
    FEATURE_NAMES,
    BBox,
    FeatureVector,
    JointSpec,
    aggregate_overlap,
    aggregate_velocity,
    enabled_feature_names,
    extract_features,
    joint_overlap_count,
    joint_velocity,
    match_and_measure,
    person_bbox,
    selected_joints,
)
from .model_io import load_model, save_model
from .pose import (
    CLASS_LABELS,
    FramePoses,
    Keypoint,
    PersonPose,
    VideoPoseSequence,
    is_valid,
    load_sequence,
    parse_frame,
    serialize_frame,
)
