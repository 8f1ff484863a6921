from lungfuse.fusion.encoder import encoder_backward, encoder_forward, init_encoder
from lungfuse.fusion.ensemble import combine_probabilities
from lungfuse.fusion.models import Batch, Classifier, CNNModel, FusionModel, fusion_forward
from lungfuse.fusion.svm import LinearSVM, train_svm
from lungfuse.fusion.trainer import Trainer, train_cnn_baseline, train_fusion, validation_split

__all__ = [
    "Batch",
    "Classifier",
    "CNNModel",
    "FusionModel",
    "LinearSVM",
    "Trainer",
    "combine_probabilities",
    "encoder_backward",
    "encoder_forward",
    "fusion_forward",
    "init_encoder",
    "train_cnn_baseline",
    "train_fusion",
    "train_svm",
    "validation_split",
]
