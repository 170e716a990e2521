"""Prior-shift estimation and adaptation for probabilistic classifiers."""

from .adaptation import (adapt_predictions, adapt_predictions_ratio,
                         clip_to_simplex, estimate_train_priors_counts,
                         estimate_train_priors_predictions, evaluate_accuracy)
from .calibration import (CalibrationParams, apply_calibration,
                          calibration_nll, fit_bcts, fit_calibration,
                          fit_temperature)
from .confusion import (conditional_to_joint, decision_counts,
                        decision_rates_hard, decision_rates_soft,
                        estimate_cm_hard, estimate_cm_soft, soft_decision_mass)
from .core import (ConfusionMatrix, DomainError, EstimationReport,
                   NumericalError, PriorShiftError, PriorShiftWarning,
                   SingularMatrixError, argmax_decision, normalize)
from .estimators import (ESTIMATORS, DirichletHyperPrior, EstimationContext,
                         SolverOptions, cm_log_likelihood,
                         estimate_priors_cm_map, estimate_priors_cm_mle,
                         estimate_priors_em, estimate_priors_inversion,
                         estimate_priors_map_pga, estimate_priors_mle_pga,
                         estimate_ratio_bbse, run_estimator, select_estimator)
from .pipeline import estimate_and_adapt, make_splits, sample_size_sweep
from .simplex import project_to_simplex
from .synth import (CALIBRATED, OVERCONFIDENT, GaussianPair,
                    LogisticClassifier, classifier_predictions,
                    generate_dataset, resample_to_priors,
                    true_confusion_matrix, true_soft_confusion_matrix)

__version__ = "0.1.0"
