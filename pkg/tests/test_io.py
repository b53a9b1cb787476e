import json

import numpy as np
import pytest

from polypdf import io as pio
from polypdf.distribution import make_pdf, uniform
from polypdf.exceptions import DomainError, FormatError, MassError, NegativityError
from polypdf.piecewise import ControlPoints, PiecewisePdf, build
from polypdf.polycore import FactoredPolynomial, Interval, Polynomial, form1_to_form2

PARAB = make_pdf(Polynomial([0, 1, -1]), (0, 1))


def roundtrip(obj):
    return json.loads(json.dumps(obj, allow_nan=False))


class TestPolynomialObjects:
    def test_coeffs_roundtrip_bit_exact(self):
        p = Polynomial([0.1, -1 / 3, 2e-17, 7.0])
        d = roundtrip(pio.poly_to_dict(p))
        assert d["form"] == "coeffs"
        q = pio.poly_from_dict(d)
        assert q.coef.tolist() == p.coef.tolist()

    def test_roots_form(self):
        f = FactoredPolynomial(2.0, [1.0, 0.5 + 1j, 0.5 - 1j])
        d = roundtrip(pio.factored_to_dict(f))
        assert d["form"] == "roots" and d["leading"] == 2.0
        assert {"re": 0.5, "im": 1.0} in d["roots"]
        p = pio.poly_from_dict(d)
        # 2 (x - 1)((x - 0.5)^2 + 1)
        expect = Polynomial([-1, 1]) * Polynomial([1.25, -1, 1]) * 2.0
        assert np.allclose(p.coef, expect.coef, atol=1e-14)

    def test_roots_default_imag(self):
        p = pio.poly_from_dict({"form": "roots", "leading": 1, "roots": [{"re": 2}]})
        assert np.allclose(p.coef, [-2, 1])

    def test_roots_via_form2(self):
        p = Polynomial([0, 6, -6])
        q = pio.poly_from_dict(roundtrip(pio.factored_to_dict(form1_to_form2(p))))
        assert np.allclose(q.coef, p.coef, atol=1e-12)

    @pytest.mark.parametrize("bad", [
        [1, 2],
        {"coefficients": [1]},
        {"form": "coeffs"},
        {"form": "coeffs", "coefficients": []},
        {"form": "coeffs", "coefficients": ["1"]},
        {"form": "coeffs", "coefficients": [True]},
        {"form": "roots", "roots": [{"re": 1}]},
        {"form": "roots", "leading": 1, "roots": [{"im": 1}]},
        {"form": "chebyshev", "coefficients": [1]},
    ])
    def test_malformed(self, bad):
        with pytest.raises(FormatError):
            pio.poly_from_dict(bad)


class TestDensityFiles:
    def test_pdf_roundtrip(self):
        d = roundtrip(pio.pdf_to_dict(PARAB))
        assert set(d) == {"pdf", "support"}
        assert d["support"] == {"lower": 0.0, "upper": 1.0}
        back = pio.pdf_from_dict(d)
        assert back.poly.coef.tolist() == PARAB.poly.coef.tolist()
        assert back.support == PARAB.support

    def test_pdf_revalidated(self):
        neg = {"pdf": {"form": "coeffs", "coefficients": [2.0, -2.0, -1.0]},
               "support": {"lower": 0, "upper": 1}}
        with pytest.raises((NegativityError, MassError)):
            pio.pdf_from_dict(neg)
        mass = {"pdf": {"form": "coeffs", "coefficients": [2.0]},
                "support": {"lower": 0, "upper": 1}}
        with pytest.raises(MassError):
            pio.pdf_from_dict(mass)

    def test_bad_support(self):
        with pytest.raises(FormatError):
            pio.pdf_from_dict({"pdf": {"form": "coeffs", "coefficients": [1]}, "support": {"lower": 0}})
        with pytest.raises(FormatError):
            pio.pdf_from_dict({"pdf": {"form": "coeffs", "coefficients": [1]}})
        with pytest.raises(DomainError):
            pio.interval_from_dict({"lower": 1, "upper": 0})

    def test_piecewise_roundtrip(self):
        pp = build(ControlPoints([0, 0.5, 1], [0, 2, 0], ["min", "max", "min"]))
        d = roundtrip(pio.piecewise_to_dict(pp))
        assert set(d) == {"segments", "smoothness"}
        assert set(d["segments"][0]) == {"poly", "local", "interval"}
        back = pio.density_from_dict(d)
        assert isinstance(back, PiecewisePdf)
        xs = np.linspace(0, 1, 101)
        assert np.array_equal(np.asarray(back.pdf(xs)), np.asarray(pp.pdf(xs)))
        assert back.smoothness == pp.smoothness

    def test_piecewise_global_only(self):
        pp = build(ControlPoints([0, 0.5, 1], [0, 2, 0], ["min", "max", "min"]))
        d = roundtrip(pio.piecewise_to_dict(pp))
        for seg in d["segments"]:
            del seg["local"]
        back = pio.piecewise_from_dict(d)
        xs = np.linspace(0, 1, 101)
        assert np.allclose(back.pdf(xs), pp.pdf(xs), atol=1e-10)

    @pytest.mark.parametrize("to", ["semi-infinite", "real-line"])
    def test_transformed_roundtrip(self, to):
        from polypdf.transform import parse_transform

        t = parse_transform(to, PARAB)
        back = pio.density_from_dict(roundtrip(t.to_dict()))
        xs = np.array([0.1, 0.7, 2.5]) if to == "semi-infinite" else np.array([-2.0, 0.0, 0.4])
        assert np.array_equal(back.pdf(xs), t.pdf(xs))
        assert back.support == t.support

    def test_transformed_unknown(self):
        with pytest.raises(FormatError):
            pio.density_from_dict({"transform": "GeneralMonotone", "parameters": {},
                                   "base": pio.pdf_to_dict(PARAB)})

    def test_density_dispatch(self):
        assert pio.density_from_dict(pio.pdf_to_dict(uniform(0, 2))).support == Interval(0, 2)

    def test_piecewise_malformed(self):
        with pytest.raises(FormatError):
            pio.piecewise_from_dict({"segments": "x"})
        with pytest.raises(FormatError):
            pio.piecewise_from_dict({"segments": [{"poly": {"form": "coeffs", "coefficients": [1]}}]})


class TestJsonFiles:
    def test_write_read(self, tmp_path):
        f = tmp_path / "d.json"
        pio.write_json(f, pio.pdf_to_dict(PARAB))
        assert pio.pdf_from_dict(pio.read_json(f)) == PARAB

    def test_no_nan(self, tmp_path):
        with pytest.raises(ValueError):
            pio.write_json(tmp_path / "x.json", {"v": float("nan")})

    def test_invalid_json(self, tmp_path):
        f = tmp_path / "bad.json"
        f.write_text("{not json")
        with pytest.raises(FormatError):
            pio.read_json(f)

    def test_missing(self, tmp_path):
        with pytest.raises(OSError):
            pio.read_json(tmp_path / "nope.json")

    def test_stdout(self, capsys):
        pio.write_json(None, {"a": 1})
        assert json.loads(capsys.readouterr().out) == {"a": 1}


class TestCsv:
    def test_histogram_header_and_not(self, tmp_path):
        a = tmp_path / "a.csv"
        a.write_text("x,y\n0.1,0.5\n0.5,1.5\n0.9,0.5\n")
        b = tmp_path / "b.csv"
        b.write_text("0.1,0.5\n\n0.5,1.5\n0.9,0.5\n")
        ha, hb = pio.read_histogram_csv(a), pio.read_histogram_csv(b)
        assert ha.x.tolist() == hb.x.tolist() == [0.1, 0.5, 0.9]
        assert ha.y.tolist() == [0.5, 1.5, 0.5]

    def test_samples(self, tmp_path):
        f = tmp_path / "s.csv"
        f.write_text("x\n0.25\n0.75\n1e-3\n")
        assert pio.read_samples_csv(f).tolist() == [0.25, 0.75, 0.001]

    def test_control_points(self, tmp_path):
        f = tmp_path / "c.csv"
        f.write_text("x,y,label\n0,0,min\n0.5,2, max\n1,0,min\n")
        cp = pio.read_control_points_csv(f)
        assert cp.labels == ("min", "max", "min")
        assert cp.y == (0.0, 2.0, 0.0)

    @pytest.mark.parametrize("reader,text", [
        (pio.read_histogram_csv, "x,y\n0.1\n"),
        (pio.read_histogram_csv, "x,y\n0.1,abc\n"),
        (pio.read_histogram_csv, "x,y\n0.1,nan\n"),
        (pio.read_samples_csv, "x\n0.1\noops\n"),
        (pio.read_samples_csv, "x\ninf\n"),
        (pio.read_samples_csv, "x\n"),
        (pio.read_control_points_csv, "0,0\n1,1\n"),
        (pio.read_samples_csv, ""),
    ])
    def test_malformed(self, tmp_path, reader, text):
        f = tmp_path / "bad.csv"
        f.write_text(text)
        with pytest.raises(FormatError):
            reader(f)

    def test_write_csv_repr(self, tmp_path):
        f = tmp_path / "o.csv"
        pio.write_csv(f, ["x", "density"], [(0.1, 1 / 3)])
        lines = f.read_text().splitlines()
        assert lines[0] == "x,density"
        assert [float(v) for v in lines[1].split(",")] == [0.1, 1 / 3]
