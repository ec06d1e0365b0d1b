
import pytest

from platekit.rules import MovableRule, RuleTemplate
from platekit.scene import ItemSpec, PlacedItem, Pose
from platekit.settle import SettleConfig
from platekit.tasks import ActionBounds, TaskDefinition


def build_task(
    fixed,
    movable,
    settle=None,
    plate_radius=0.12,
    bounds=None,
    task_id="custom",
):
    """Assemble a TaskDefinition from (spec, pose) fixed items and movable specs."""
    items = tuple(sorted([f[0] for f in fixed] + list(movable), key=lambda s: s.id))
    fixed_poses = {spec.id: pose for spec, pose in fixed}
    settle = settle or SettleConfig()
    bounds = bounds or ActionBounds(x=(-0.11, 0.11), y=(-0.11, 0.11), yaw=(-1.6, 1.6))
    base = tuple(PlacedItem(s, fixed_poses[s.id]) for s, _ in sorted(fixed, key=lambda f: f[0].id))
    rule = RuleTemplate(
        task_id=task_id,
        base=base,
        movable_specs=tuple(m for m in items if not m.fixed),
        movables=tuple(
            MovableRule(item_id=m.id, lean_on=base[0].spec.id)
            for m in items
            if not m.fixed
        ),
    )
    return TaskDefinition(
        task_id=task_id,
        plate_radius=plate_radius,
        items=items,
        fixed_poses=fixed_poses,
        action_bounds=bounds,
        settle=settle,
        rule=rule,
    )


@pytest.fixture
def block_and_stick():
    """One fixed block plus one elongated movable item."""
    block = ItemSpec(id=0, half_extents=(0.025, 0.04), height=0.03, mass=0.05, fixed=True)
    stick = ItemSpec(id=1, half_extents=(0.04, 0.009), height=0.018, mass=0.01)
    return build_task(
        fixed=[(block, Pose(-0.03, 0.0, 0.015))],
        movable=[stick],
    )
