import json
import math

import pytest

from platekit import ItemSpec, PlacedItem, PlacementAction, Pose, SceneState, load_task, step
from platekit.geometry import polygon_area
from platekit.render import RenderedScene, render


def test_empty_plate_renders_plate_only():
    s = SceneState(task_id="t", placed=(), stage=0)
    scene = render(s, "top", plate_radius=0.12)
    assert len(scene.primitives) == 1
    assert scene.primitives[0].fill == "plate"
    assert scene.primitives[0].item_id == -1


def test_same_state_renders_identically():
    task = load_task("taro")
    s = step(task.initial_state, PlacementAction(0.03, 0.0, 0.2), task)
    assert render(s, "oblique", task.plate_radius) == render(s, "oblique", task.plate_radius)


def test_toppled_item_shows_its_long_face():
    # a tall box lying on its side projects a larger footprint than upright
    tall = ItemSpec(id=0, half_extents=(0.01, 0.01), height=0.06, mass=0.01)
    upright = SceneState(
        task_id="t", placed=(PlacedItem(tall, Pose(0, 0, 0.03)),), stage=1
    )
    toppled = SceneState(
        task_id="t",
        placed=(PlacedItem(tall, Pose(0, 0, 0.01, 0.0, 0.5 * math.pi, 0.0)),),
        stage=1,
    )
    area_up = polygon_area(render(upright, "top").primitives[-1].vertices)
    area_flat = polygon_area(render(toppled, "top").primitives[-1].vertices)
    assert area_flat > area_up


def test_painter_order_by_base_height_then_id():
    task = load_task("shrimp")
    s = task.initial_state
    s = step(s, PlacementAction(0.0, -0.03, 0.1), task)
    s = step(s, PlacementAction(0.0, 0.03, -0.1), task)
    scene = render(s, "oblique", task.plate_radius)
    orders = [p.z_order for p in scene.primitives]
    assert orders == sorted(orders)
    assert scene.primitives[0].fill == "plate"


def test_reference_badge_flag():
    s = SceneState(task_id="t", placed=(), stage=0)
    assert render(s, "top", reference=True).reference is True


def test_to_dict_is_json_serializable():
    task = load_task("taro")
    s = step(task.initial_state, PlacementAction(0.03, 0.0, 0.2), task)
    payload = render(s, "oblique", task.plate_radius).to_dict()
    text = json.dumps(payload)
    back = json.loads(text)
    assert back["view"] == "oblique"
    assert len(back["primitives"]) == len(s.placed) + 1


def test_unknown_view_rejected():
    s = SceneState(task_id="t", placed=(), stage=0)
    with pytest.raises(ValueError):
        render(s, "isometric")


def test_one_primitive_per_item():
    task = load_task("tempura")
    scene = render(task.initial_state, "top", task.plate_radius)
    ids = sorted(p.item_id for p in scene.primitives)
    assert ids == [-1, 0, 1]
