"""Compositional joint-visual-attention detection for single static scenes.

Fuses per-face 3D gaze directions, a metric depth map and segment
proposals to find each face's gaze target and any target shared by
multiple faces, with a synthetic billboard-world simulator providing
exact ground truth.
"""
from .bundle import parse_scene, read_scene_bundle, serialize_scene, write_scene_bundle
from .detect import (Candidate, DetectorConfig, Mode, NoTargetReason,
                     TargetDetection, detect_target, detect_target_2d,
                     detect_target_3d, enumerate_candidates)
from .evaluate import (AblationPair, EvalSummary, agent_accuracy,
                       evaluate_dataset, mask_iou, run_ablation,
                       scene_target_iou)
from .events import (JointAttentionEvent, SceneReport, analyze_scene,
                     classify_agents, make_caption, resolve_events)
from .geometry import (CameraModel, GazeVector, PixelScale, angular_error_deg,
                       gaze_projection_2d, pixel_scale_at_face,
                       project_world_point, ray_depth_at_pixel)
from .scene import (DepthMap, FaceObservation, RayHit, SceneInput,
                    SegmentProposal, region_mean_depth, trace_ray_hits,
                    validate_scene)
from .simulate import (GroundTruth, NoiseSpec, SimParams, WorldAgent,
                       WorldObject, WorldSpec, apply_noise, render_world,
                       sample_ambiguous_world, sample_world)

__version__ = "0.1.0"
