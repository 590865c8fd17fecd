#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rostf/error.hpp"
#include "rostf/fusion.hpp"
#include "rostf/linops.hpp"
#include "rostf/metrics.hpp"
#include "rostf/pipeline.hpp"
#include "rostf/prox.hpp"
#include "rostf/simulate.hpp"

namespace py = pybind11;
using namespace rostf;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Images cross the boundary as (bands, height, width) float64 arrays, which
// is exactly the band-major layout of MultiBandImage.
MultiBandImage to_image(const Array& a) {
    if (a.ndim() != 3) throw GeometryError("expected an array of shape (bands, height, width)");
    const Geometry g{static_cast<std::size_t>(a.shape(1)), static_cast<std::size_t>(a.shape(2)),
                     static_cast<std::size_t>(a.shape(0))};
    return MultiBandImage(g, Vector(a.data(), a.data() + a.size()));
}

Array to_array(const MultiBandImage& img) {
    const Geometry& g = img.geometry();
    Array out({g.bands, g.height, g.width});
    std::copy(img.values().begin(), img.values().end(), out.mutable_data());
    return out;
}

Array to_flat(const Vector& v) {
    Array out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

Vector to_vector(const Array& a) { return Vector(a.data(), a.data() + a.size()); }

py::dict output_dict(const FusionOutput& o) {
    py::dict d;
    d["h_t_hat"] = to_array(o.h_t_hat);
    d["h_r_denoised"] = to_array(o.h_r_denoised);
    d["s_hr"] = to_array(o.s_hr);
    d["s_lr"] = to_array(o.s_lr);
    d["s_lt"] = to_array(o.s_lt);
    d["iterations"] = o.iterations;
    d["converged"] = o.converged;
    std::vector<double> rel, obj;
    for (const auto& r : o.trace) {
        rel.push_back(r.rel_change);
        obj.push_back(r.objective);
    }
    d["rel_change"] = rel;
    d["objective"] = obj;
    return d;
}

py::dict report_dict(const MetricsReport& r) {
    py::dict d;
    d["rmse"] = r.rmse;
    d["sam"] = r.sam;
    d["mssim"] = r.mssim;
    d["cc"] = r.cc;
    return d;
}

}  // namespace

PYBIND11_MODULE(_rostf, m) {
    m.doc() = "Robust spatiotemporal fusion: raster I/O, operators, fusion solver and metrics.";
    m.attr("__version__") = pipeline::kVersion;

    // Translators run newest first, so the base class goes in first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
    py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

    // raster
    m.def("read_raster", [](const std::filesystem::path& p) { return to_array(read_raster(p)); }, py::arg("path"));
    m.def(
        "write_raster", [](const Array& a, const std::filesystem::path& p) { write_raster(to_image(a), p); },
        py::arg("image"), py::arg("path"));

    // operators
    m.def(
        "diff",
        [](const Array& a) {
            const MultiBandImage img = to_image(a);
            return to_flat(DiffOperator(img.geometry()).apply(img.values()));
        },
        py::arg("image"), "Stacked forward differences (D_v x; D_h x), flattened.");
    m.def(
        "blur",
        [](const Array& a, std::size_t k) {
            const MultiBandImage img = to_image(a);
            return to_array(MultiBandImage(img.geometry(), BlurOperator(img.geometry(), k).apply(img.values())));
        },
        py::arg("image"), py::arg("k"));
    m.def(
        "make_lr", [](const Array& a, std::size_t k) { return to_array(make_lr(to_image(a), k)); }, py::arg("image"),
        py::arg("k"));
    m.def(
        "upsample_nearest",
        [](const Array& a, std::size_t k) {
            const MultiBandImage lr = to_image(a);
            const Geometry& g = lr.geometry();
            return to_array(MultiBandImage({g.height * k, g.width * k, g.bands}, upsample_nearest(lr.values(), g, k)));
        },
        py::arg("image"), py::arg("k"));

    // prox
    m.def(
        "project_l1_ball",
        [](const Array& x, double radius) {
            Vector v = to_vector(x);
            project_l1_ball(v, radius);
            return to_flat(v);
        },
        py::arg("x"), py::arg("radius"));
    m.def(
        "project_l2_ball",
        [](const Array& x, double radius, std::optional<Array> center) {
            Vector v = to_vector(x), c = center ? to_vector(*center) : Vector{};
            project_l2_ball(v, {2, c, radius});
            return to_flat(v);
        },
        py::arg("x"), py::arg("radius"), py::arg("center") = py::none());
    m.def(
        "project_hyperslab",
        [](const Array& x, double center, double radius) {
            Vector v = to_vector(x);
            project_hyperslab(v, {center, radius});
            return to_flat(v);
        },
        py::arg("x"), py::arg("center"), py::arg("radius"));
    m.def(
        "prox_l12",
        [](const Array& x, std::size_t group_size, std::size_t stride, double gamma) {
            Vector v = to_vector(x);
            prox_l12(v, group_size, stride, gamma);
            return to_flat(v);
        },
        py::arg("x"), py::arg("group_size"), py::arg("stride"), py::arg("gamma"));

    // simulate
    py::class_<CaseConfig>(m, "CaseConfig")
        .def(py::init<>())
        .def_static("preset", &CaseConfig::preset, py::arg("name"), py::arg("seed") = 0)
        .def_readwrite("name", &CaseConfig::name)
        .def_readwrite("sigma_h", &CaseConfig::sigma_h)
        .def_readwrite("sigma_l", &CaseConfig::sigma_l)
        .def_readwrite("r_h", &CaseConfig::r_h)
        .def_readwrite("r_l", &CaseConfig::r_l)
        .def_readwrite("seed", &CaseConfig::seed);

    m.def(
        "add_noise",
        [](const Array& a, double sigma, double rate, std::uint64_t seed) {
            return to_array(add_noise(to_image(a), sigma, rate, seed));
        },
        py::arg("image"), py::arg("sigma"), py::arg("rate"), py::arg("seed"));
    m.def(
        "make_fixture",
        [](const std::string& case_name, std::size_t size, std::size_t bands, std::size_t k, std::uint64_t seed,
           std::size_t regions) {
            FixtureSpec spec;
            spec.height = spec.width = size;
            spec.bands = bands;
            spec.k = k;
            spec.seed = seed;
            spec.regions = regions;
            const Fixture fx = make_fixture(spec, CaseConfig::preset(case_name, seed));
            py::dict d;
            d["h_r_true"] = to_array(fx.h_r_true);
            d["h_t_true"] = to_array(fx.h_t_true);
            d["h_r"] = to_array(fx.inputs.h_r);
            d["l_r"] = to_array(fx.inputs.l_r);
            d["l_t"] = to_array(fx.inputs.l_t);
            return d;
        },
        py::arg("case") = "case1", py::arg("size") = 64, py::arg("bands") = 4, py::arg("k") = 8,
        py::arg("seed") = 7, py::arg("regions") = 6);

    // fusion
    py::class_<RostfParams>(m, "RostfParams")
        .def(py::init<>())
        .def_readwrite("lambda_", &RostfParams::lambda)
        .def_readwrite("p", &RostfParams::p)
        .def_readwrite("alpha", &RostfParams::alpha)
        .def_readwrite("beta", &RostfParams::beta)
        .def_readwrite("c", &RostfParams::c)
        .def_readwrite("eps_h", &RostfParams::eps_h)
        .def_readwrite("eps_l", &RostfParams::eps_l)
        .def_readwrite("eta_h", &RostfParams::eta_h)
        .def_readwrite("eta_l", &RostfParams::eta_l)
        .def_readwrite("k", &RostfParams::k)
        .def("to_json", [](const RostfParams& p) { return nlohmann::json(p).dump(); });

    m.def(
        "default_params",
        [](const Array& h_r, const Array& l_r, const Array& l_t, const CaseConfig& noise, int p, std::size_t k) {
            return default_params({to_image(h_r), to_image(l_r), to_image(l_t)}, noise, p, k);
        },
        py::arg("h_r"), py::arg("l_r"), py::arg("l_t"), py::arg("noise") = CaseConfig{}, py::arg("p") = 2,
        py::arg("k") = 8);

    m.def(
        "fuse",
        [](const Array& h_r, const Array& l_r, const Array& l_t, const RostfParams& params, std::size_t max_iters,
           double tol) {
            ppds::StoppingRule stop;
            stop.max_iterations = max_iters;
            stop.tolerance = tol;
            const FusionInput in{to_image(h_r), to_image(l_r), to_image(l_t)};
            std::optional<FusionOutput> out;
            {
                py::gil_scoped_release release;
                out.emplace(fuse(in, params, stop));
            }
            py::dict d = output_dict(*out);
            d["constraint_residuals"] = constraint_residuals(*out, in, params);
            return d;
        },
        py::arg("h_r"), py::arg("l_r"), py::arg("l_t"), py::arg("params"), py::arg("max_iters") = 20000,
        py::arg("tol") = 1e-5);

    // metrics
    m.def("rmse", [](const Array& a, const Array& b) { return rmse(to_image(a), to_image(b)); });
    m.def("sam", [](const Array& a, const Array& b) { return sam(to_image(a), to_image(b)); });
    m.def("mssim", [](const Array& a, const Array& b) { return mssim(to_image(a), to_image(b)); });
    m.def(
        "ssim", [](const Array& a, const Array& b, std::size_t band) { return ssim(to_image(a), to_image(b), band); },
        py::arg("est"), py::arg("truth"), py::arg("band") = 0);
    m.def("cc", [](const Array& a, const Array& b) { return cc(to_image(a), to_image(b)); });
    m.def("evaluate", [](const Array& a, const Array& b) { return report_dict(evaluate(to_image(a), to_image(b))); });

    // pipeline
    m.def(
        "runcase",
        [](const std::string& case_name, std::uint64_t seed, std::vector<int> p_values, std::size_t size,
           std::size_t bands, std::size_t k, std::size_t max_iters, std::optional<std::filesystem::path> out) {
            pipeline::RuncaseOptions opt;
            opt.case_name = case_name;
            opt.seed = seed;
            opt.p_values = std::move(p_values);
            opt.size = size;
            opt.bands = bands;
            opt.k = k;
            opt.stop.max_iterations = max_iters;
            if (out) opt.out = *out;
            pipeline::RuncaseReport r;
            {
                py::gil_scoped_release release;
                r = pipeline::runcase(opt);
            }
            return nlohmann::json(r).dump();
        },
        py::arg("case"), py::arg("seed") = 7, py::arg("p_values") = std::vector<int>{1, 2}, py::arg("size") = 64,
        py::arg("bands") = 4, py::arg("k") = 8, py::arg("max_iters") = 20000, py::arg("out") = py::none(),
        "Runs simulate -> fuse -> evaluate and returns the report as a JSON string.");
}
