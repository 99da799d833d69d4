#include "lact/json_io.hpp"

#include "lact/errors.hpp"
#include "lact/io.hpp"

#include <algorithm>
#include <fstream>

namespace lact {

void reject_unknown_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& what)
{
    if (!j.is_object())
        throw UsageError(what + " must be a JSON object");
    for (const auto& [key, value] : j.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!known)
            throw UsageError("unknown key '" + key + "' in " + what);
    }
}

Json to_json(const FanBeamGeometry& g)
{
    return Json{{"num_detectors", g.num_detectors},
                {"detector_pixel_size", g.detector_pixel_size},
                {"source_to_center", g.source_to_center},
                {"center_to_detector", g.center_to_detector},
                {"num_angles", g.num_angles},
                {"angle_start_deg", g.angle_start_deg},
                {"angle_step_deg", g.angle_step_deg},
                {"image_size", g.image_size},
                {"image_pixel_size", g.image_pixel_size}};
}

FanBeamGeometry geometry_from_json(const Json& j, FanBeamGeometry g)
{
    reject_unknown_keys(j,
                        {"num_detectors", "detector_pixel_size", "source_to_center", "center_to_detector",
                         "num_angles", "angle_start_deg", "angle_step_deg", "image_size", "image_pixel_size"},
                        "geometry");
    read_optional(j, "num_detectors", g.num_detectors);
    read_optional(j, "detector_pixel_size", g.detector_pixel_size);
    read_optional(j, "source_to_center", g.source_to_center);
    read_optional(j, "center_to_detector", g.center_to_detector);
    read_optional(j, "num_angles", g.num_angles);
    read_optional(j, "angle_start_deg", g.angle_start_deg);
    read_optional(j, "angle_step_deg", g.angle_step_deg);
    read_optional(j, "image_size", g.image_size);
    read_optional(j, "image_pixel_size", g.image_pixel_size);
    return g;
}

namespace {

Json range_json(const phantom::Range& r)
{
    return Json::array({r.lo, r.hi});
}

void read_range(const Json& j, const char* key, phantom::Range& r)
{
    if (auto it = j.find(key); it != j.end()) {
        if (!it->is_array() || it->size() != 2)
            throw UsageError(std::string("manifest key '") + key + "' must be [lo, hi]");
        r.lo = (*it)[0].get<double>();
        r.hi = (*it)[1].get<double>();
    }
}

} // namespace

Json to_json(const phantom::DatasetManifest& m)
{
    Json kinds = Json::array();
    for (auto k : m.kinds)
        kinds.push_back(phantom::to_string(k));
    return Json{{"version", m.version},
                {"count", m.count},
                {"master_seed", m.master_seed},
                {"fraction_shapes", m.fraction_shapes},
                {"fraction_voronoi", m.fraction_voronoi},
                {"geometry", to_json(m.geometry)},
                {"write_sinograms", m.write_sinograms},
                {"noise_sigma", m.noise_sigma},
                {"radius_frac", range_json(m.radius_frac)},
                {"translation_px", m.translation_px},
                {"c0", range_json(m.c0)},
                {"rim_brightness", range_json(m.rim_brightness)},
                {"c3_rel", range_json(m.c3_rel)},
                {"edge_width_px", range_json(m.edge_width_px)},
                {"min_shapes", m.min_shapes},
                {"max_shapes", m.max_shapes},
                {"separation_px", range_json(m.separation_px)},
                {"shape_scale_frac", range_json(m.shape_scale_frac)},
                {"varied_fraction", m.varied_fraction},
                {"kinds", kinds},
                {"kind_weights", m.kind_weights},
                {"min_seeds", m.min_seeds},
                {"max_seeds", m.max_seeds},
                {"border_radius_px", range_json(m.border_radius_px)},
                {"corner_smoothing_px", range_json(m.corner_smoothing_px)}};
}

phantom::DatasetManifest manifest_from_json(const Json& j)
{
    reject_unknown_keys(j,
                        {"preset", "version", "count", "master_seed", "fraction_shapes", "fraction_voronoi", "geometry",
                         "write_sinograms", "noise_sigma", "radius_frac", "translation_px", "c0", "rim_brightness",
                         "c3_rel", "edge_width_px", "min_shapes", "max_shapes", "separation_px", "shape_scale_frac",
                         "varied_fraction", "kinds", "kind_weights", "min_seeds", "max_seeds", "border_radius_px",
                         "corner_smoothing_px"},
                        "manifest");
    phantom::DatasetManifest m;
    if (auto it = j.find("preset"); it != j.end()) {
        const std::string p = it->get<std::string>();
        if (p == "desk_small")
            m = phantom::DatasetManifest::desk_small();
        else if (p != "desk")
            throw UsageError("unknown manifest preset '" + p + "' (use desk or desk_small)");
    }
    read_optional(j, "version", m.version);
    read_optional(j, "count", m.count);
    read_optional(j, "master_seed", m.master_seed);
    read_optional(j, "fraction_shapes", m.fraction_shapes);
    read_optional(j, "fraction_voronoi", m.fraction_voronoi);
    if (auto it = j.find("geometry"); it != j.end())
        m.geometry = geometry_from_json(*it, m.geometry);
    read_optional(j, "write_sinograms", m.write_sinograms);
    read_optional(j, "noise_sigma", m.noise_sigma);
    read_range(j, "radius_frac", m.radius_frac);
    read_optional(j, "translation_px", m.translation_px);
    read_range(j, "c0", m.c0);
    read_range(j, "rim_brightness", m.rim_brightness);
    read_range(j, "c3_rel", m.c3_rel);
    read_range(j, "edge_width_px", m.edge_width_px);
    read_optional(j, "min_shapes", m.min_shapes);
    read_optional(j, "max_shapes", m.max_shapes);
    read_range(j, "separation_px", m.separation_px);
    read_range(j, "shape_scale_frac", m.shape_scale_frac);
    read_optional(j, "varied_fraction", m.varied_fraction);
    if (auto it = j.find("kinds"); it != j.end()) {
        m.kinds.clear();
        for (const auto& k : *it)
            m.kinds.push_back(phantom::shape_kind_from_string(k.get<std::string>()));
    }
    read_optional(j, "kind_weights", m.kind_weights);
    read_optional(j, "min_seeds", m.min_seeds);
    read_optional(j, "max_seeds", m.max_seeds);
    read_range(j, "border_radius_px", m.border_radius_px);
    read_range(j, "corner_smoothing_px", m.corner_smoothing_px);
    m.validate();
    return m;
}

Json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw DataError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_json_file(const std::filesystem::path& path, const Json& j)
{
    const std::string text = j.dump(2) + "\n";
    io::write_file_atomic(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

} // namespace lact
