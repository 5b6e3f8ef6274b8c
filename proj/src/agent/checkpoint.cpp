#include <cstdio>
#include <fstream>
#include <sstream>

#include "binary_io.hpp"
#include "steersman/agent.hpp"
#include "steersman/error.hpp"

namespace steersman::agent {

// Layout: a short text header (one "key value..." per line, ending with
// "end_header"), then binary sections in a fixed order.

namespace {

constexpr const char* kMagic = "steersman-checkpoint";

std::string exact(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_vector_xd(std::ostream& out, const Eigen::VectorXd& v) {
    io::write_array(out, v.data(), static_cast<std::size_t>(v.size()));
}

Eigen::VectorXd read_vector_xd(std::istream& in) {
    const auto v = io::read_vector<double>(in);
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string rng_text(const std::mt19937_64& rng) {
    std::ostringstream out;
    out << rng;
    return out.str();
}

void rng_from(std::mt19937_64& rng, const std::string& text) {
    std::istringstream in(text);
    in >> rng;
    if (!in) throw FormatError("malformed RNG state in checkpoint");
}

struct Header {
    int version = 0;
    std::string digest;
    std::vector<int> dims;
    int atoms = 0;
    double v_min = 0.0;
    double v_max = 0.0;
    std::int64_t global_step = 0;
    int epoch = 0;
};

Header read_header(std::istream& in, const std::filesystem::path& path) {
    Header h;
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw FormatError(path.string() + ": not a steersman checkpoint");
    bool ended = false;
    while (std::getline(in, line)) {
        if (line == "end_header") {
            ended = true;
            break;
        }
        std::istringstream fields(line);
        std::string key;
        fields >> key;
        if (key == "version") {
            fields >> h.version;
        } else if (key == "config_digest") {
            fields >> h.digest;
        } else if (key == "layer_dims") {
            int d;
            while (fields >> d) h.dims.push_back(d);
        } else if (key == "support") {
            fields >> h.atoms >> h.v_min >> h.v_max;
        } else if (key == "global_step") {
            fields >> h.global_step;
        } else if (key == "epoch") {
            fields >> h.epoch;
        }
    }
    if (!ended) throw FormatError(path.string() + ": checkpoint header not terminated");
    if (h.version != kCheckpointVersion)
        throw FormatError(path.string() + ": unsupported checkpoint version " + std::to_string(h.version) +
                          " (expected version " + std::to_string(kCheckpointVersion) + ")");
    if (h.dims.size() < 2 || h.atoms < 2) throw FormatError(path.string() + ": checkpoint header missing layer dims");
    return h;
}

ValueNetwork network_from(const Header& h, Eigen::VectorXd params, const std::filesystem::path& path) {
    const int out = h.dims.back();
    if (out % h.atoms != 0) throw FormatError(path.string() + ": output width not divisible by atom count");
    std::vector<int> hidden(h.dims.begin() + 1, h.dims.end() - 1);
    ValueNetwork net(h.dims.front(), hidden, out / h.atoms, h.atoms);
    if (params.size() != net.parameters().size())
        throw FormatError(path.string() + ": parameter count does not match the declared layer dims");
    net.parameters() = std::move(params);
    return net;
}

}  // namespace

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw FormatError("cannot open '" + tmp.string() + "' for writing");
        out << kMagic << '\n';
        out << "version " << kCheckpointVersion << '\n';
        out << "config_digest " << (digest_.empty() ? "-" : digest_) << '\n';
        out << "layer_dims";
        for (int d : online_.dims()) out << ' ' << d;
        out << '\n';
        out << "support " << config_.support.atom_count << ' ' << exact(config_.support.v_min) << ' '
            << exact(config_.support.v_max) << '\n';
        out << "global_step " << global_step_ << '\n';
        out << "epoch " << epoch_ << '\n';
        out << "end_header\n";

        write_vector_xd(out, online_.parameters());
        write_vector_xd(out, target_.parameters());
        write_vector_xd(out, optimizer_.first_moment);
        write_vector_xd(out, optimizer_.second_moment);
        io::write_pod(out, optimizer_.steps);
        replay_.write(out);

        io::write_pod<std::uint64_t>(out, nstep_.pending().size());
        for (const auto& p : nstep_.pending()) {
            io::write_vector(out, p.state);
            io::write_pod<std::int32_t>(out, p.action);
            io::write_pod(out, p.reward);
        }

        const auto& s = train_env_.state();
        io::write_vector(out, s.positions);
        io::write_pod<std::int32_t>(out, s.condition);
        io::write_pod<std::int32_t>(out, s.step_count);
        io::write_string(out, train_env_.rng_state());
        io::write_string(out, test_env_.rng_state());
        io::write_string(out, rng_text(agent_rng_));
        io::write_string(out, rng_text(test_rng_));
        io::write_pod(out, gradient_steps_);
        io::write_vector(out, condition_counts_);
        io::write_pod(out, elapsed_offset_);
        io::write_pod<std::uint64_t>(out, history_.size());
        for (const auto& m : history_) io::write_pod(out, m);
        if (!out) throw FormatError("failed writing checkpoint '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

void Trainer::load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
    const Header h = read_header(in, path);
    const std::string expected = digest_.empty() ? "-" : digest_;
    if (h.digest != expected)
        throw ConfigError("checkpoint '" + path.string() + "' was written for config digest " + h.digest +
                          ", current config digest is " + expected);
    if (h.dims != online_.dims()) throw FormatError(path.string() + ": network layout differs from the current config");

    online_.parameters() = read_vector_xd(in);
    target_.parameters() = read_vector_xd(in);
    optimizer_.first_moment = read_vector_xd(in);
    optimizer_.second_moment = read_vector_xd(in);
    optimizer_.steps = io::read_pod<std::int64_t>(in);
    replay_.read(in);

    nstep_.clear();
    const auto pending = io::read_pod<std::uint64_t>(in);
    for (std::uint64_t k = 0; k < pending; ++k) {
        NStepAccumulator::Pending p;
        p.state = io::read_vector<std::int32_t>(in);
        p.action = io::read_pod<std::int32_t>(in);
        p.reward = io::read_pod<double>(in);
        nstep_.pending().push_back(std::move(p));
    }

    auto positions = io::read_vector<int>(in);
    const int condition = io::read_pod<std::int32_t>(in);
    const int step_count = io::read_pod<std::int32_t>(in);
    env::EnvState s = train_env_.make_state(std::move(positions), condition);
    s.step_count = step_count;
    train_env_.restore(std::move(s));
    train_env_.set_rng_state(io::read_string(in));
    test_env_.set_rng_state(io::read_string(in));
    rng_from(agent_rng_, io::read_string(in));
    rng_from(test_rng_, io::read_string(in));
    gradient_steps_ = io::read_pod<std::int64_t>(in);
    condition_counts_ = io::read_vector<std::int64_t>(in);
    elapsed_offset_ = io::read_pod<double>(in);
    const auto epochs = io::read_pod<std::uint64_t>(in);
    history_.clear();
    for (std::uint64_t k = 0; k < epochs; ++k) history_.push_back(io::read_pod<EpochMetrics>(in));
    global_step_ = h.global_step;
    epoch_ = h.epoch;
}

CheckpointSummary read_checkpoint_summary(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
    const Header h = read_header(in, path);
    CheckpointSummary out;
    out.config_digest = h.digest;
    out.online = network_from(h, read_vector_xd(in), path);
    out.support = {h.atoms, h.v_min, h.v_max};
    out.global_step = h.global_step;
    out.epoch = h.epoch;
    return out;
}

}  // namespace steersman::agent
