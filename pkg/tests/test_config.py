import pytest

from spde_lab.common import (
    ConfigError,
    CovarianceKind,
    ExperimentKind,
    OperatorSpecError,
    ParameterDomainError,
    parse_config,
    read_config,
    validate_document,
)
from spde_lab.components import build_components, load_config

from .conftest import small_document


def test_defaults_are_filled():
    cfg = parse_config({})
    assert cfg.kind is ExperimentKind.Solve
    assert cfg.paths == 16
    assert cfg.seed == 0
    assert cfg.fmt == "json"
    assert cfg.p_values == (2.0,)
    assert cfg.tier == "default"
    assert cfg.section("grid") == {"N": 256, "L": 8.0}
    assert cfg.section("coefficients")["sigma"]["preset"] == "constant"


def test_unknown_key_is_named_with_its_section():
    with pytest.raises(ConfigError, match=r"covariance\.bta"):
        parse_config({"covariance": {"bta": 1.0}})


def test_unknown_section_rejected():
    with pytest.raises(ConfigError, match="solver"):
        validate_document({"solver": {}})


def test_type_and_option_errors():
    with pytest.raises(ConfigError, match=r"grid\.N"):
        parse_config({"grid": {"N": "sixteen"}})
    with pytest.raises(ConfigError, match=r"covariance\.kind"):
        parse_config({"covariance": {"kind": "cauchy"}})
    with pytest.raises(ConfigError, match=r"experiment\.p"):
        parse_config({"experiment": {"p": [1.5]}})


def test_custom_covariance_kind_points_to_python_api():
    with pytest.raises(ConfigError, match=r"CovarianceModel\.custom"):
        parse_config({"covariance": {"kind": "custom"}})


def test_integer_accepted_for_float_fields():
    cfg = parse_config({"grid": {"L": 4}})
    assert cfg.section("grid")["L"] == 4.0
    assert isinstance(cfg.section("grid")["L"], float)


def test_json_syntax_error_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "grid": {\n    "N": 16,\n  }\n}', encoding="utf-8")
    with pytest.raises(ConfigError, match="第 4 行"):
        read_config(path)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        read_config(tmp_path / "missing.json")


def test_overrides_and_hash():
    cfg = parse_config(small_document("solve"))
    same = cfg.with_overrides(threads=3, output_dir="elsewhere")
    assert same.threads == 3
    assert same.config_hash() == cfg.config_hash()
    other = cfg.with_overrides(seed=8)
    assert other.seed == 8
    assert other.section("experiment")["seed"] == 8
    assert other.config_hash() != cfg.config_hash()
    assert cfg.with_overrides(kind="noise").kind is ExperimentKind.NoiseValidate


@pytest.mark.parametrize(
    "overrides",
    [{"kind": "bogus"}, {"seed": -1}, {"seed": 2**64}, {"paths": 0}, {"threads": -2}, {"fmt": "xml"}],
)
def test_invalid_overrides(overrides):
    cfg = parse_config({})
    with pytest.raises(ConfigError):
        cfg.with_overrides(**overrides)


def test_riesz_beta_out_of_range():
    cfg = parse_config(
        small_document("solve", covariance={"kind": "riesz", "k": 2, "beta": 2.5}, grid={"N": 8})
    )
    with pytest.raises(ParameterDomainError, match=r"\]0,k\["):
        build_components(cfg)


def test_hurst_length_must_match_dimension():
    cfg = parse_config(
        small_document("solve", covariance={"kind": "fractional", "k": 2, "hurst": [0.75]})
    )
    with pytest.raises(ConfigError):
        build_components(cfg)


def test_components_for_solve():
    components = build_components(parse_config(small_document("solve")))
    assert components.model.kind is CovarianceKind.White
    assert components.grid.N == 16
    assert components.time_grid.steps == 8
    assert components.operator.constant
    assert components.u0.shape == (16,)
    assert not components.u0.any()
    assert components.factorization is None


def test_variable_operator_requires_small_dt():
    document = small_document(
        "solve", operator={"preset": "sinusoidal", "amplitude": 0.3}, time={"T": 1.0, "M": 4}
    )
    with pytest.raises(ParameterDomainError, match="dt ≤ h"):
        build_components(parse_config(document))


def test_sinusoidal_amplitude_must_be_below_one():
    document = small_document("solve", operator={"preset": "sinusoidal", "amplitude": 1.2})
    with pytest.raises(OperatorSpecError):
        build_components(parse_config(document))


def test_expression_operator_from_config():
    document = small_document(
        "solve",
        operator={
            "preset": "expression",
            "diffusion_expr": [["1 + 0.5*sin(2*pi*x0)"]],
            "rho": 0.5,
        },
    )
    components = build_components(parse_config(document))
    assert not components.operator.constant
    assert components.operator.time_independent


def test_expression_with_unknown_variable():
    document = small_document(
        "solve", operator={"preset": "expression", "diffusion_expr": [["1 + y"]]}
    )
    with pytest.raises(OperatorSpecError, match="未知变量"):
        build_components(parse_config(document))


def test_picard_step_limit():
    document = small_document("picard", time={"T": 1.0, "M": 1024})
    with pytest.raises(ParameterDomainError):
        build_components(parse_config(document))


def test_factorization_defaults_for_white_noise():
    components = build_components(parse_config(small_document("factorize")))
    fcfg = components.factorization
    assert fcfg.eta == pytest.approx(0.525)
    assert fcfg.delta == pytest.approx(0.9 * 0.475 / 2)
    assert fcfg.rule == "right"


def test_factorization_delta_out_of_range():
    document = small_document("factorize", factorization={"delta": 0.3, "eta": 0.6})
    with pytest.raises(ConfigError):
        build_components(parse_config(document))


def test_regularity_directions_validated():
    document = small_document("regularity", regularity={"directions": ["diagonal"]})
    with pytest.raises(ConfigError, match="regularity.directions"):
        build_components(parse_config(document))


def test_coefficient_presets_from_config():
    document = small_document(
        "solve",
        coefficients={
            "sigma": {"preset": "sin", "amplitude": 0.5, "shift": 1.0},
            "drift": {"preset": "affine", "slope": -1.0, "intercept": 0.0},
        },
        initial={"preset": "bump", "amplitude": 2.0, "width": 0.1},
    )
    components = build_components(parse_config(document))
    assert components.coefficients.lipschitz == pytest.approx(1.0)
    assert components.coefficients.state_dependent
    assert components.u0.max() == pytest.approx(2.0)


def test_load_config_runs_all_checks(write_config):
    path = write_config(small_document("solve", covariance={"kind": "bessel", "alpha": -1.0}))
    with pytest.raises(ParameterDomainError):
        load_config(path)
    good = write_config(small_document("noise"), name="good.json")
    assert load_config(good).kind is ExperimentKind.NoiseValidate
