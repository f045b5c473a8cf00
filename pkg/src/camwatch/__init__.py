"""camwatch: network-camera discovery, archiving, and activity analytics."""

from .cameras import CameraDescriptor, camera_id_for_url, canonical_url
from .detections import (
    BoundingBox,
    Detection,
    FrameDetections,
    SceneAssignment,
    assign_scene,
    clip_person_count,
    count_people,
    count_vehicles,
    filter_confident,
    load_detection_file,
    sample_video_frames,
)
from .discovery import CandidateLink, CrawlBudget, crawl, extract_candidate_links, identify_candidates
from .distancing import DistancingConfig, PairScore, ViolationReport, depth_similarity, pair_score, violation_report
from .evaluation import EvalResult, GroundTruthFrame, evaluate, iou, match_frame
from .groups import GroupBounds, ViolationGraph, build_violation_graph, group_bounds, group_lower_bound, group_upper_bound
from .images import PixelImage
from .liveness import (
    LivenessConfig,
    LivenessVerdict,
    checksum_changed,
    classify_liveness,
    is_frozen,
    luminance_difference,
    percent_difference,
    select_equally_spaced,
)
from .reporting import (
    DailyCameraStat,
    HistogramSpec,
    RegionSeries,
    build_histograms,
    daily_camera_max,
    emit_reports,
    presentation_filter,
    region_daily_sum,
    weekly_max,
)

__version__ = "0.1.0"
