"""Scene-specific trajectory novelty detection.

Learns a vocabulary of elementary motions from feature tracks observed in a
fixed-camera scene, fits a multi-scale Markov chain ensemble and a
pursuit-constrained path-length model of normal motion, and scores unseen
tracks for behavioural novelty down to the most anomalous primitive pair.
"""

from .errors import (AssignmentImpossible, DegenerateInputError, FeatureLost,
                     ModelFormatError, ParseError, TrackwatchError,
                     UnscorableTrack, ValidationError)
from .markov import (ChainModel, EmpiricalCdf, EnsembleModel, ScaleScore,
                     average_loglik, cdf_inverse, cdf_value, conformance_rho1,
                     fit_chain)
from .pgm import read_frame_dir, read_pgm, write_pgm
from .pipeline import (SceneModel, ThresholdConfig, TrackScore,
                       default_scale_configs, load_model, model_from_bytes,
                       model_to_bytes, save_model, score_one, score_tracks,
                       select_threshold, train, write_scores_csv)
from .pursuit import (PairStats, PursuitModel, WorstPair, conformance_rho2,
                      fit_pursuit, pair_decompose, sequence_conformance,
                      triplet_log_prob)
from .tracker import (FeatureState, TrackerConfig, build_pyramid,
                      min_eigenvalue_map, run_tracker, select_features,
                      symmetric_ssd, track_step)
from .tracklets import (Primitive, PrimitiveVocabulary, ScaleConfig, Tracklet,
                        angular_distance, assign_tracklet, canonize_track,
                        circular_mean_update, cluster_tracklets,
                        extract_tracklets, mod_pi)
from .tracks import (FilterConfig, Track, TrackPoint, filter_tracks,
                     load_tracks, save_tracks, track_variance)

__version__ = "0.1.0"
