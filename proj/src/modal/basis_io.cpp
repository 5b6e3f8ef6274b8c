#include <fstream>

#include <json.hpp>

#include "steersman/error.hpp"
#include "steersman/modal.hpp"

namespace steersman::modal {

namespace {

constexpr const char* kFormatTag = "steersman-modal-basis";

template <typename T>
T required(const nlohmann::json& doc, const char* key, const std::filesystem::path& path) {
    if (!doc.contains(key)) throw FormatError(path.string() + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": field '" + key + "' has the wrong type (" + e.what() + ")");
    }
}

}  // namespace

void save_basis(const std::filesystem::path& path, const ModalBasis& basis) {
    nlohmann::json doc;
    doc["format"] = kFormatTag;
    doc["version"] = kBasisFormatVersion;
    doc["condition_label"] = basis.condition_label;
    doc["cols"] = basis.grid.cols;
    doc["rows"] = basis.grid.rows;
    auto coords = nlohmann::json::array();
    for (const auto& c : basis.grid.node_coords) coords.push_back({c.x(), c.y(), c.z()});
    doc["node_coords"] = std::move(coords);
    doc["frequencies"] = std::vector<double>(basis.frequencies.data(), basis.frequencies.data() + basis.frequencies.size());
    doc["modes"] = basis.mode_count();
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(basis.phi.size()));
    for (Eigen::Index i = 0; i < basis.phi.rows(); ++i)
        for (Eigen::Index j = 0; j < basis.phi.cols(); ++j) flat.push_back(basis.phi(i, j));
    doc["phi"] = std::move(flat);

    std::ofstream out(path);
    if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
    out << doc.dump(1) << '\n';
    if (!out) throw FormatError("failed writing '" + path.string() + "'");
}

ModalBasis load_basis(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path.string() + "' for reading");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path.string() + ": malformed modal-basis file (" + e.what() + ")");
    }
    if (!doc.is_object() || doc.value("format", std::string{}) != kFormatTag)
        throw FormatError(path.string() + ": not a modal-basis file");
    const int version = required<int>(doc, "version", path);
    if (version != kBasisFormatVersion)
        throw FormatError(path.string() + ": unsupported modal-basis version " + std::to_string(version) +
                          " (expected version " + std::to_string(kBasisFormatVersion) + ")");

    ModalBasis basis;
    basis.condition_label = required<std::string>(doc, "condition_label", path);
    basis.grid.cols = required<int>(doc, "cols", path);
    basis.grid.rows = required<int>(doc, "rows", path);
    const auto coords = required<std::vector<std::vector<double>>>(doc, "node_coords", path);
    const auto freqs = required<std::vector<double>>(doc, "frequencies", path);
    const auto flat = required<std::vector<double>>(doc, "phi", path);
    const int modes = required<int>(doc, "modes", path);

    const long long declared = static_cast<long long>(basis.grid.cols) * basis.grid.rows;
    if (basis.grid.cols < 1 || basis.grid.rows < 1 || static_cast<long long>(coords.size()) != declared)
        throw FormatError(path.string() + ": node_coords has " + std::to_string(coords.size()) +
                          " entries but the declared grid is " + std::to_string(basis.grid.cols) + "x" +
                          std::to_string(basis.grid.rows));
    if (modes < 1 || static_cast<int>(freqs.size()) != modes)
        throw FormatError(path.string() + ": frequencies length does not match the declared mode count");
    if (static_cast<long long>(flat.size()) != declared * modes)
        throw FormatError(path.string() + ": phi has " + std::to_string(flat.size()) + " entries, expected " +
                          std::to_string(declared * modes));

    basis.grid.node_coords.reserve(coords.size());
    for (const auto& c : coords) {
        if (c.size() != 3) throw FormatError(path.string() + ": node coordinate without 3 components");
        basis.grid.node_coords.emplace_back(c[0], c[1], c[2]);
    }
    basis.frequencies = Eigen::Map<const Eigen::VectorXd>(freqs.data(), modes);
    basis.phi.resize(declared, modes);
    for (long long i = 0; i < declared; ++i)
        for (int j = 0; j < modes; ++j) basis.phi(i, j) = flat[static_cast<std::size_t>(i * modes + j)];
    return basis;
}

}  // namespace steersman::modal
