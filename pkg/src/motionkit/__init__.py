"""motionkit: unified 669-dim motion representation, masking/resampling
tooling, and a body-part-aware diffusion denoiser with a DDPM sampler."""

from .condition import (
    ConditionRefiner,
    ConditionSet,
    HashEmbedder,
    dropout_conditions,
)
from .denoiser import (
    Denoiser,
    LatentMotion,
    ModelConfig,
    PRESETS,
    get_preset,
)
from .diffusion import (
    NoiseSchedule,
    ddpm_step,
    guided_x0,
    make_schedule,
    q_sample,
    sample,
    training_loss,
)
from .errors import (
    ContractError,
    DimensionError,
    MotionKitError,
    ParseError,
    RegistryError,
    SingularRotationError,
    ValidationError,
)
from .io import (
    BatchPlanConfig,
    batch_plan,
    load,
    save,
    synth_motion,
    translate,
)
from .kinematics import (
    Skeleton,
    complete_missing_parts,
    default_skeleton,
    forward_kinematics,
    keypoints_to_unified,
    unified_to_keypoints,
)
from .kinetic import (
    GlobalTemplateSet,
    backend_name,
    shift_templates,
    taylor_eval,
    temporal_mu,
    temporal_weights,
    weight_grad,
)
from .layout import (
    MotionSequence,
    PartLayout,
    UnifiedFrame,
    canonical_layout,
    pack,
    unpack,
)
from .masks import (
    BodyPartMask,
    MaskConvention,
    MaskStrategy,
    Task,
    TaskSpec,
    drop_to_visibility,
    loss_weights,
    random_train_mask,
    task_mask,
    visibility_to_drop,
)
from .resample import resample

__version__ = "0.1.0"
