#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace qbmrl {

using BitVec = std::vector<std::uint8_t>;  // binary units, values 0/1
using Spin = std::int8_t;                  // Ising spins, values -1/+1

// Layer topology of a deep Boltzmann machine clamped between a binary state
// layer and a binary action layer. Layer 0 is the state, layers 1..H are
// hidden, layer H+1 is the action. Only adjacent layers are connected.
struct Layout {
    std::size_t state_size = 0;
    std::size_t action_size = 0;
    std::vector<std::size_t> hidden;

    std::size_t n_layers() const { return hidden.size() + 2; }

    std::size_t layer_size(std::size_t layer) const {
        if (layer == 0) return state_size;
        if (layer == hidden.size() + 1) return action_size;
        return hidden[layer - 1];
    }

    std::size_t n_hidden() const {
        std::size_t n = 0;
        for (std::size_t h : hidden) n += h;
        return n;
    }

    std::size_t n_nodes() const { return state_size + action_size + n_hidden(); }

    // Number of weight blocks; block b connects layer b with layer b+1.
    std::size_t n_blocks() const { return n_layers() - 1; }

    std::size_t n_edges() const {
        std::size_t n = 0;
        for (std::size_t b = 0; b < n_blocks(); ++b) n += layer_size(b) * layer_size(b + 1);
        return n;
    }

    void validate() const {
        if (state_size == 0) throw std::invalid_argument("layout: state layer must be non-empty");
        if (action_size == 0) throw std::invalid_argument("layout: action layer must be non-empty");
        if (hidden.empty()) throw std::invalid_argument("layout: at least one hidden layer required");
        for (std::size_t h : hidden)
            if (h == 0) throw std::invalid_argument("layout: hidden layer of size zero");
    }

    bool operator==(const Layout&) const = default;
};

// Edge between two hidden nodes in adjacent layers. g1/g2 are global hidden
// node indices (layer-major), block/i/j locate the weight inside the network.
struct HiddenEdge {
    std::uint32_t block;
    std::uint32_t i, j;
    std::uint32_t g1, g2;
};

class Network {
public:
    Network(Layout layout, std::uint64_t seed) : Network(std::move(layout), InitTag{}) {
        GaussianStream g(seed);
        for (auto& block : blocks_)
            for (double& w : block) w = g.next();
        for (auto& layer : biases_)
            for (double& w : layer) w = g.next();
    }

    static Network zeros(Layout layout) { return Network(std::move(layout), InitTag{}); }

    const Layout& layout() const { return layout_; }

    double weight(std::size_t block, std::size_t i, std::size_t j) const {
        return blocks_[block][i * layout_.layer_size(block + 1) + j];
    }
    double& weight(std::size_t block, std::size_t i, std::size_t j) {
        return blocks_[block][i * layout_.layer_size(block + 1) + j];
    }

    double bias(std::size_t layer, std::size_t i) const { return biases_[layer][i]; }
    double& bias(std::size_t layer, std::size_t i) { return biases_[layer][i]; }

    std::span<const double> block(std::size_t b) const { return blocks_[b]; }
    std::span<double> block(std::size_t b) { return blocks_[b]; }
    std::span<const double> layer_biases(std::size_t l) const { return biases_[l]; }
    std::span<double> layer_biases(std::size_t l) { return biases_[l]; }

    // Global hidden index of node j in hidden layer `layer` (1-based layer id).
    std::size_t hidden_index(std::size_t layer, std::size_t j) const {
        return hidden_offsets_[layer - 1] + j;
    }

    const std::vector<HiddenEdge>& hidden_edges() const { return hidden_edges_; }

    // FNV-1a over the raw weight bytes in canonical order; used by tests to
    // assert bit-identical training runs.
    std::uint64_t fingerprint() const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        auto eat = [&h](double v) {
            std::uint64_t bits;
            static_assert(sizeof(bits) == sizeof(v));
            __builtin_memcpy(&bits, &v, sizeof(bits));
            for (int k = 0; k < 8; ++k) {
                h ^= (bits >> (8 * k)) & 0xff;
                h *= 0x100000001b3ull;
            }
        };
        for (const auto& block : blocks_)
            for (double v : block) eat(v);
        for (const auto& layer : biases_)
            for (double v : layer) eat(v);
        return h;
    }

    void save(std::ostream& out) const;
    static Network load(std::istream& in);

    std::string layer_name(std::size_t layer) const {
        if (layer == 0) return "state";
        if (layer == layout_.hidden.size() + 1) return "action";
        return "h" + std::to_string(layer);
    }

private:
    struct InitTag {};

    Network(Layout layout, InitTag) : layout_(std::move(layout)) {
        layout_.validate();
        blocks_.resize(layout_.n_blocks());
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            blocks_[b].assign(layout_.layer_size(b) * layout_.layer_size(b + 1), 0.0);
        biases_.resize(layout_.n_layers());
        for (std::size_t l = 0; l < biases_.size(); ++l)
            biases_[l].assign(layout_.layer_size(l), 0.0);

        hidden_offsets_.resize(layout_.hidden.size());
        std::size_t off = 0;
        for (std::size_t k = 0; k < layout_.hidden.size(); ++k) {
            hidden_offsets_[k] = off;
            off += layout_.hidden[k];
        }
        // Cache all hidden-hidden edges (blocks 1 .. n_blocks-2).
        for (std::size_t b = 1; b + 1 < layout_.n_blocks(); ++b) {
            for (std::size_t i = 0; i < layout_.layer_size(b); ++i)
                for (std::size_t j = 0; j < layout_.layer_size(b + 1); ++j)
                    hidden_edges_.push_back({static_cast<std::uint32_t>(b),
                                             static_cast<std::uint32_t>(i),
                                             static_cast<std::uint32_t>(j),
                                             static_cast<std::uint32_t>(hidden_index(b, i)),
                                             static_cast<std::uint32_t>(hidden_index(b + 1, j))});
        }
    }

    Layout layout_;
    std::vector<std::vector<double>> blocks_;
    std::vector<std::vector<double>> biases_;
    std::vector<std::size_t> hidden_offsets_;
    std::vector<HiddenEdge> hidden_edges_;
};

inline void copy_weights(const Network& src, Network& dst) {
    if (!(src.layout() == dst.layout()))
        throw std::invalid_argument("copy_weights: incompatible layouts");
    for (std::size_t b = 0; b < src.layout().n_blocks(); ++b) {
        auto s = src.block(b);
        auto d = dst.block(b);
        for (std::size_t k = 0; k < s.size(); ++k) d[k] = s[k];
    }
    for (std::size_t l = 0; l < src.layout().n_layers(); ++l) {
        auto s = src.layer_biases(l);
        auto d = dst.layer_biases(l);
        for (std::size_t k = 0; k < s.size(); ++k) d[k] = s[k];
    }
}

// Energy of the machine with state and action units clamped to binary values
// and hidden spins fixed:
//   E = - sum_i b_i v_i  - sum_h b_h s_h  - sum_(v,h) w v s  - sum_(h,h') w s s'
// where v are clamped 0/1 units, s are +-1 hidden spins, and the last two sums
// run over adjacent-layer edges only.
inline double classical_clamped_energy(const Network& net, std::span<const std::uint8_t> state,
                                       std::span<const std::uint8_t> action,
                                       std::span<const Spin> hidden) {
    const Layout& lay = net.layout();
    if (state.size() != lay.state_size || action.size() != lay.action_size ||
        hidden.size() != lay.n_hidden())
        throw std::invalid_argument("classical_clamped_energy: dimension mismatch");

    const std::size_t last = lay.n_layers() - 1;
    double e = 0.0;
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state[i]) e -= net.bias(0, i);
    for (std::size_t j = 0; j < action.size(); ++j)
        if (action[j]) e -= net.bias(last, j);
    for (std::size_t l = 1; l < last; ++l)
        for (std::size_t j = 0; j < lay.layer_size(l); ++j)
            e -= net.bias(l, j) * hidden[net.hidden_index(l, j)];

    // state -> first hidden layer
    for (std::size_t i = 0; i < state.size(); ++i) {
        if (!state[i]) continue;
        for (std::size_t j = 0; j < lay.layer_size(1); ++j)
            e -= net.weight(0, i, j) * hidden[net.hidden_index(1, j)];
    }
    // hidden -> hidden
    for (const HiddenEdge& edge : net.hidden_edges())
        e -= net.weight(edge.block, edge.i, edge.j) * hidden[edge.g1] * hidden[edge.g2];
    // last hidden layer -> action
    const std::size_t ab = lay.n_blocks() - 1;
    for (std::size_t j = 0; j < action.size(); ++j) {
        if (!action[j]) continue;
        for (std::size_t i = 0; i < lay.layer_size(ab); ++i)
            e -= net.weight(ab, i, j) * hidden[net.hidden_index(ab, i)];
    }
    return e;
}

// --- checkpoint serialization ------------------------------------------------
//
// Text format, one entry per line:
//   layerA.nodeI-layerB.nodeJ = <decimal>
// Self-pairs (same layer and node on both sides) carry biases; distinct pairs
// carry adjacent-layer weights. Layers are named state, h1..hK, action.

inline void Network::save(std::ostream& out) const {
    char buf[64];
    auto fmt = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (std::size_t l = 0; l < layout_.n_layers(); ++l)
        for (std::size_t i = 0; i < layout_.layer_size(l); ++i)
            out << layer_name(l) << '.' << i << '-' << layer_name(l) << '.' << i << " = "
                << fmt(bias(l, i)) << '\n';
    for (std::size_t b = 0; b < layout_.n_blocks(); ++b)
        for (std::size_t i = 0; i < layout_.layer_size(b); ++i)
            for (std::size_t j = 0; j < layout_.layer_size(b + 1); ++j)
                out << layer_name(b) << '.' << i << '-' << layer_name(b + 1) << '.' << j << " = "
                    << fmt(weight(b, i, j)) << '\n';
}

namespace detail {

struct NodeRef {
    int layer;  // 0 = state, 1..K = hidden, -1 = action until resolved
    std::size_t node;
    bool is_action;
};

inline NodeRef parse_node_ref(const std::string& tok, std::size_t line_no) {
    const auto dot = tok.find('.');
    if (dot == std::string::npos)
        throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                 ": malformed node reference '" + tok + "'");
    const std::string name = tok.substr(0, dot);
    const std::string idx = tok.substr(dot + 1);
    std::size_t node = 0;
    try {
        node = std::stoul(idx);
    } catch (const std::exception&) {
        throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                 ": bad node index '" + idx + "'");
    }
    if (name == "state") return {0, node, false};
    if (name == "action") return {-1, node, true};
    if (name.size() > 1 && name[0] == 'h') {
        int layer = 0;
        try {
            layer = std::stoi(name.substr(1));
        } catch (const std::exception&) {
            layer = 0;
        }
        if (layer >= 1) return {layer, node, false};
    }
    throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                             ": unknown layer '" + name + "'");
}

}  // namespace detail

inline Network Network::load(std::istream& in) {
    struct Entry {
        detail::NodeRef a, b;
        double value;
        std::size_t line_no;
    };
    std::vector<Entry> entries;
    std::string line;
    std::size_t line_no = 0;
    int max_hidden_layer = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // strip comments and whitespace-only lines
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                     ": missing '='");
        std::string lhs = line.substr(0, eq);
        std::string rhs = line.substr(eq + 1);
        auto trim = [](std::string& s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
        };
        trim(lhs);
        trim(rhs);
        const auto dash = lhs.find('-');
        if (dash == std::string::npos)
            throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                     ": missing '-' in edge name");
        detail::NodeRef a = detail::parse_node_ref(lhs.substr(0, dash), line_no);
        detail::NodeRef b = detail::parse_node_ref(lhs.substr(dash + 1), line_no);
        double value = 0.0;
        try {
            value = std::stod(rhs);
        } catch (const std::exception&) {
            throw std::runtime_error("checkpoint line " + std::to_string(line_no) +
                                     ": bad value '" + rhs + "'");
        }
        for (const auto& r : {a, b})
            if (!r.is_action && r.layer >= 1) max_hidden_layer = std::max(max_hidden_layer, r.layer);
        entries.push_back({a, b, value, line_no});
    }
    if (entries.empty()) throw std::runtime_error("checkpoint: no entries");
    if (max_hidden_layer == 0) throw std::runtime_error("checkpoint: no hidden layer entries");

    Layout lay;
    lay.hidden.assign(static_cast<std::size_t>(max_hidden_layer), 0);
    const int action_layer = max_hidden_layer + 1;
    auto resolve = [&](const detail::NodeRef& r) { return r.is_action ? action_layer : r.layer; };
    for (const auto& e : entries) {
        for (const auto& r : {e.a, e.b}) {
            const std::size_t need = r.node + 1;
            if (r.is_action)
                lay.action_size = std::max(lay.action_size, need);
            else if (r.layer == 0)
                lay.state_size = std::max(lay.state_size, need);
            else
                lay.hidden[r.layer - 1] = std::max(lay.hidden[r.layer - 1], need);
        }
    }
    lay.validate();

    Network net = Network::zeros(lay);
    std::size_t filled = 0;
    std::vector<std::vector<bool>> seen_bias(lay.n_layers());
    for (std::size_t l = 0; l < lay.n_layers(); ++l) seen_bias[l].assign(lay.layer_size(l), false);
    std::vector<std::vector<bool>> seen_weight(lay.n_blocks());
    for (std::size_t b = 0; b < lay.n_blocks(); ++b)
        seen_weight[b].assign(lay.layer_size(b) * lay.layer_size(b + 1), false);

    for (const auto& e : entries) {
        const int la = resolve(e.a);
        const int lb = resolve(e.b);
        const auto fail = [&](const std::string& what) {
            throw std::runtime_error("checkpoint line " + std::to_string(e.line_no) + ": " + what);
        };
        if (la == lb) {
            if (e.a.node != e.b.node) fail("intra-layer edge is not a bias");
            if (seen_bias[la][e.a.node]) fail("duplicate bias entry");
            seen_bias[la][e.a.node] = true;
            net.bias(static_cast<std::size_t>(la), e.a.node) = e.value;
        } else {
            const int lo = std::min(la, lb);
            const int hi = std::max(la, lb);
            if (hi - lo != 1) fail("edge connects non-adjacent layers");
            const std::size_t i = (la < lb) ? e.a.node : e.b.node;
            const std::size_t j = (la < lb) ? e.b.node : e.a.node;
            const std::size_t flat = i * lay.layer_size(static_cast<std::size_t>(hi)) + j;
            if (seen_weight[lo][flat]) fail("duplicate weight entry");
            seen_weight[lo][flat] = true;
            net.weight(static_cast<std::size_t>(lo), i, j) = e.value;
        }
        ++filled;
    }
    if (filled != lay.n_edges() + lay.n_nodes())
        throw std::runtime_error("checkpoint: incomplete network (" + std::to_string(filled) +
                                 " entries, expected " +
                                 std::to_string(lay.n_edges() + lay.n_nodes()) + ")");
    return net;
}

}  // namespace qbmrl
