import math

import numpy as np
import pytest

from brtomo.geometry import Circle, Point2, Scene, Segment, outward_normal, segment_blocked
from brtomo.rays import (
    Ray,
    RayGenerationError,
    RayKind,
    RaySetConfig,
    admissible_triples,
    format_ray,
    generate_lambertian,
    generate_specular,
    generate_unbroken,
    parse_ray,
    read_rays,
    shuffle_rays,
    specular_receiver,
    write_rays,
)


def check_ray(scene, ray):
    assert scene.outer.on_boundary(ray.transmitter)
    assert scene.outer.on_boundary(ray.receiver)
    assert ray.transmitter != ray.receiver
    h = ray.reflection
    if h is None:
        assert not segment_blocked(Segment(ray.transmitter, ray.receiver), scene.obstacle)
    else:
        assert scene.obstacle.on_boundary(h)
        for seg in ray.segments():
            assert not segment_blocked(seg, scene.obstacle, excluded=h)


def reflection_angles(scene, ray):
    h = np.array(ray.reflection)
    n = outward_normal(scene.obstacle, ray.reflection)
    into = h - np.array(ray.transmitter)
    out = np.array(ray.receiver) - h
    a_in = math.acos(np.clip(-(into @ n) / np.hypot(*into), -1, 1))
    a_out = math.acos(np.clip((out @ n) / np.hypot(*out), -1, 1))
    return a_in, a_out


def test_ray_validation():
    with pytest.raises(ValueError):
        Ray(RayKind.BROKEN, Point2(0, 1), Point2(1, 0))
    with pytest.raises(ValueError):
        Ray.unbroken((1, 0), (1, 0))


def test_zero_counts_give_empty(desk_scene, rng):
    cfg = RaySetConfig(36, 36, 36, 0, 0)
    assert generate_unbroken(desk_scene, cfg, rng) == []
    assert generate_lambertian(desk_scene, cfg, rng) == []
    assert generate_specular(desk_scene, cfg, rng) == []


def test_unbroken_exhaustive_small_case(rng):
    # chord y = 0 stays clear of an obstacle sitting above it
    scene = Scene(Circle((0, 0), 1.0), Circle((0, 0.5), 0.2))
    rays = generate_unbroken(scene, RaySetConfig(2, 2, 0, n_u=2), rng)
    assert {(r.transmitter, r.receiver) for r in rays} == {
        (Point2(1.0, 0.0), Point2(-1.0, 1.2246467991473532e-16)),
        (Point2(-1.0, 1.2246467991473532e-16), Point2(1.0, 0.0)),
    }
    with pytest.raises(RayGenerationError):
        generate_unbroken(scene, RaySetConfig(2, 2, 0, n_u=3), rng)


def test_unbroken_output_valid(desk_scene, rng):
    rays = generate_unbroken(desk_scene, RaySetConfig(36, 36, 0, n_u=100), rng)
    assert len(rays) == 100
    assert len({(r.transmitter, r.receiver) for r in rays}) == 100
    for r in rays:
        assert r.kind is RayKind.UNBROKEN
        check_ray(desk_scene, r)


def test_lambertian_single_triple(unit_scene):
    T = [Point2(-1.0, 0.0)]
    R = [Point2(0.0, 1.0)]
    H = [Point2(-0.5 * math.cos(math.pi / 4), 0.5 * math.sin(math.pi / 4))]
    assert admissible_triples(unit_scene, T, R, H).tolist() == [[0, 0, 0]]
    # a hit point facing away from the transmitter admits nothing
    assert admissible_triples(unit_scene, T, R, [Point2(0.5, 0.0)]).shape == (0, 3)


def test_lambertian_output_valid(desk_scene, rng):
    rays = generate_lambertian(desk_scene, RaySetConfig(36, 36, 36, n_b=500), rng)
    assert len(rays) == 500
    assert len({(r.transmitter, r.receiver, r.reflection) for r in rays}) == 500
    for r in rays:
        check_ray(desk_scene, r)
        n = outward_normal(desk_scene.obstacle, r.reflection)
        h = np.array(r.reflection)
        assert (np.array(r.transmitter) - h) @ n > 0
        assert (np.array(r.receiver) - h) @ n > 0
    # weak anti-degeneracy: many distinct reflection points
    assert len({r.reflection for r in rays}) >= min(36, 500 // 4)


def test_lambertian_too_many(desk_scene, rng):
    with pytest.raises(RayGenerationError):
        generate_lambertian(desk_scene, RaySetConfig(4, 4, 4, n_b=10_000), rng)


def test_specular_retroreflection_rejected(unit_scene):
    t = Point2(-1.0, 0.0)
    assert specular_receiver(unit_scene, t, Point2(-0.5, 0.0)) is None


def test_specular_law_example(unit_scene):
    c = math.cos(math.pi / 4)
    h = Point2(-0.5 * c, -0.5 * c)
    r = specular_receiver(unit_scene, (-1.0, 0.0), h)
    assert r is not None
    a_in, a_out = reflection_angles(unit_scene, Ray.broken((-1.0, 0.0), h, r))
    assert abs(a_in - a_out) < 1e-9


def test_specular_output_obeys_law(desk_scene, rng):
    rays = generate_specular(desk_scene, RaySetConfig(36, 36, 36, n_b=500), rng)
    assert len(rays) == 500
    for r in rays:
        check_ray(desk_scene, r)
        a_in, a_out = reflection_angles(desk_scene, r)
        assert abs(a_in - a_out) < 1e-9


def test_specular_budget_exhausted(desk_scene, rng):
    with pytest.raises(RayGenerationError):
        generate_specular(desk_scene, RaySetConfig(4, 4, 4, n_b=50), rng)


@pytest.mark.parametrize("gen", [generate_unbroken, generate_lambertian, generate_specular])
def test_generation_deterministic(desk_scene, gen):
    cfg = RaySetConfig(36, 36, 36, n_b=200, n_u=200)
    a = gen(desk_scene, cfg, np.random.default_rng(7))
    b = gen(desk_scene, cfg, np.random.default_rng(7))
    assert a == b


def test_shuffle_rays(desk_scene, rng):
    assert shuffle_rays([], rng) == []
    one = [Ray.unbroken((1, 0), (0, 1))]
    assert shuffle_rays(one, rng) == one
    rays = generate_unbroken(desk_scene, RaySetConfig(60, 60, 0, n_u=1000), rng)
    mixed = shuffle_rays(rays, rng)
    assert mixed != rays
    assert sorted(map(format_ray, mixed)) == sorted(map(format_ray, rays))
    assert shuffle_rays(rays, np.random.default_rng(3)) == shuffle_rays(rays, np.random.default_rng(3))


def test_ray_file_roundtrip(tmp_path, desk_scene, rng):
    cfg = RaySetConfig(36, 36, 36, n_b=20, n_u=20)
    rays = generate_specular(desk_scene, cfg, rng) + generate_unbroken(desk_scene, cfg, rng)
    path = tmp_path / "rays.txt"
    write_rays(path, rays)
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode().splitlines()
    assert lines[0].startswith("B ") and len(lines[0].split()) == 7
    assert lines[-1].startswith("U ") and len(lines[-1].split()) == 5
    assert read_rays(path) == rays


def test_parse_ray_rejects_garbage():
    with pytest.raises(ValueError):
        parse_ray("X 1 2 3 4")
    with pytest.raises(ValueError):
        parse_ray("B 1 2 3 4")
