import math

import pytest

from clockdimer.config import RunConfig


def test_defaults_are_heterodimer():
    cfg = RunConfig()
    d = cfg.dimer()
    assert (d.m1.D, d.m1.E, d.m2.D, d.m2.E) == (21.0, 1.9, 16.5, 2.6)
    assert d.j.J_perp == 0.1 and d.j.J_zz == pytest.approx(0.05)
    assert cfg.amplitude_mT == 1.0
    assert math.isinf(cfg.t2_grid_us[-1])
    assert cfg.dimer(100.0).j.J_zz == pytest.approx(0.1)


def test_from_text_overrides():
    cfg = RunConfig.from_text(
        """
        [dimer]
        J_zz_MHz = 100   # comment
        [sweep]
        t2_us = 1, 10, inf
        jzz_MHz =
        """
    )
    assert cfg.J_zz_MHz == 100.0
    assert cfg.t2_grid_us == (1.0, 10.0, math.inf)
    assert cfg.jzz_grid_MHz == ()


def test_digest_stable_and_sensitive():
    a = RunConfig()
    b = RunConfig.from_text("[dimer]\nJ_zz_MHz = 50\n", source="x.ini")
    assert a.digest() == b.digest()
    assert len(a.digest()) == 16
    assert a.override(J_zz_MHz=60.0).digest() != a.digest()


@pytest.mark.parametrize(
    "text",
    [
        "[dimer]\nbogus = 1\n",
        "[nosuch]\nx = 1\n",
        "[dimer]\nD1_GHz = -1\n",
        "[sweep]\nt2_us = 0, 1\n",
        "[levels]\nsteps = 2\n",
        "[drive]\namplitude_mT = abc\n",
    ],
)
def test_invalid_configs(text):
    with pytest.raises(ValueError):
        RunConfig.from_text(text)


def test_from_file(tmp_path):
    p = tmp_path / "run.ini"
    p.write_text("[drive]\namplitude_mT = 2\n")
    cfg = RunConfig.from_file(p)
    assert cfg.amplitude_mT == 2.0 and cfg.source == str(p)
