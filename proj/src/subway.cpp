#include "pspace/subway.hpp"

#include <algorithm>
#include <map>
#include "json.hpp"
#include <numeric>

namespace pspace::subway {

using nlohmann::json;

std::vector<std::vector<int>> Instance::incidence() const {
    std::vector<std::vector<int>> inc(vertex_ids.size());
    for (int e = 0; e < int(edges.size()); ++e) {
        inc[edges[e].tail].push_back(e);
        inc[edges[e].head].push_back(e);
    }
    return inc;
}

int Instance::vertex_index(const std::string& id) const {
    auto it = std::find(vertex_ids.begin(), vertex_ids.end(), id);
    return it == vertex_ids.end() ? -1 : int(it - vertex_ids.begin());
}

int Instance::edge_index(const std::string& id) const {
    for (int e = 0; e < int(edges.size()); ++e)
        if (edges[e].id == id) return e;
    return -1;
}

std::vector<Move> legal_moves(const Instance& in, const State& s) {
    std::vector<Move> out;
    for (int e = 0; e < int(in.edges.size()); ++e) {
        const Edge& ed = in.edges[e];
        if (in.oriented) {
            int t = tail_of(in, s, e), h = head_of(in, s, e);
            if (s.token[t] == ed.color && s.token[h] == NoToken) out.push_back({e, t});
        } else {
            for (int t : {ed.tail, ed.head}) {
                int h = in.other(e, t);
                if (s.token[t] == ed.color && s.token[h] == NoToken) out.push_back({e, t});
            }
        }
    }
    return out;
}

void apply_move_inplace(const Instance& in, State& s, Move m) {
    if (m.edge < 0 || m.edge >= int(in.edges.size())) throw IllegalMove("no such edge");
    const Edge& ed = in.edges[m.edge];
    if (m.from != ed.tail && m.from != ed.head) throw IllegalMove("vertex not on edge");
    if (in.oriented && tail_of(in, s, m.edge) != m.from) throw IllegalMove("against edge direction");
    int to = in.other(m.edge, m.from);
    if (s.token[m.from] != ed.color) throw IllegalMove("token colour mismatch");
    if (s.token[to] != NoToken) throw IllegalMove("destination occupied");
    s.token[to] = s.token[m.from];
    s.token[m.from] = NoToken;
    if (s.special == m.from) s.special = to;
    if (in.oriented) s.flipped[m.edge] ^= 1;
}

State apply_move(const Instance& in, const State& s, Move m) {
    State t = s;
    apply_move_inplace(in, t, m);
    return t;
}

bool is_won(const Instance& in, const State& s) { return s.special == in.target; }

bool is_valid_vertex(const Instance& in, int v) {
    std::map<int, int> per;
    int deg = 0;
    for (const Edge& e : in.edges)
        if (e.tail == v || e.head == v) {
            ++deg;
            ++per[e.color];
        }
    if (deg > 3) return false;
    for (auto& [c, n] : per)
        if (n > 2) return false;
    return true;
}

Embedding embedding(const Instance& in) {
    Embedding m;
    for (const Edge& e : in.edges) m.ends.push_back({e.tail, e.head});
    m.rotation = in.rotation;
    return m;
}

int count_empty(const State& s) {
    return int(std::count(s.token.begin(), s.token.end(), NoToken));
}

std::vector<std::string> validate_instance(const Instance& in, const State& s, bool strict) {
    std::vector<std::string> bad;
    int V = in.num_vertices(), E = int(in.edges.size());
    if (in.colors < 1) bad.push_back("colour count < 1");
    if (int(in.rotation.size()) != V) {
        bad.push_back("rotation does not cover every vertex");
        return bad;
    }
    for (const Edge& e : in.edges) {
        if (e.tail < 0 || e.tail >= V || e.head < 0 || e.head >= V) {
            bad.push_back("edge " + e.id + " has a missing endpoint");
            return bad;
        }
        if (e.tail == e.head) bad.push_back("edge " + e.id + " is a self-loop");
        if (e.color < 0 || e.color >= in.colors) bad.push_back("edge " + e.id + " colour out of range");
    }
    if (bad.empty())
        for (auto& m : embedding(in).check(in.vertex_ids)) bad.push_back(m);
    if (int(s.token.size()) != V || int(s.flipped.size()) != E) {
        bad.push_back("state size mismatch");
        return bad;
    }
    for (int v = 0; v < V; ++v)
        if (s.token[v] != NoToken && (s.token[v] < 0 || s.token[v] >= in.colors))
            bad.push_back("token colour out of range at " + in.vertex_ids[v]);
    if (in.special < 0 || in.special >= V || in.target < 0 || in.target >= V) {
        bad.push_back("special or target vertex missing");
    } else if (s.token[s.special] == NoToken) {
        bad.push_back("special vertex holds no token");
    }
    if (strict) {
        for (int v = 0; v < V; ++v)
            if (!is_valid_vertex(in, v)) bad.push_back("invalid vertex " + in.vertex_ids[v]);
        int empty = count_empty(s);
        int allowed = (in.target >= 0 && in.target < V && s.token[in.target] == NoToken) ? 2 : 1;
        if (empty != allowed)
            bad.push_back("expected exactly one bubble besides the target, found " + std::to_string(empty) +
                          " empty vertices");
    }
    return bad;
}

std::string state_key(const Instance& in, const State& s) {
    std::string k;
    k.reserve(s.token.size() + s.flipped.size() / 8 + 8);
    for (auto t : s.token) k.push_back(char(t + 1));
    if (in.oriented) {
        uint8_t acc = 0;
        for (size_t i = 0; i < s.flipped.size(); ++i) {
            acc |= uint8_t(s.flipped[i] << (i % 8));
            if (i % 8 == 7) {
                k.push_back(char(acc));
                acc = 0;
            }
        }
        k.push_back(char(acc));
    }
    k.append(reinterpret_cast<const char*>(&s.special), sizeof(int));
    return k;
}

std::string color_name(int c) {
    if (c == Purple) return "purple";
    if (c == Orange) return "orange";
    return std::to_string(c);
}

static int parse_color(const json& j, int colors) {
    if (j.is_number_integer()) return j.get<int>();
    std::string s = j.get<std::string>();
    if (s == "purple") return Purple;
    if (s == "orange") return Orange;
    try {
        return std::stoi(s);
    } catch (...) {
        throw std::runtime_error("unknown colour '" + s + "'");
    }
    (void)colors;
}

static std::string id_string(const json& j, bool& numeric) {
    if (j.is_number_integer()) {
        numeric = true;
        return std::to_string(j.get<long long>());
    }
    if (!j.is_string()) throw std::runtime_error("ids must be strings or integers");
    return j.get<std::string>();
}

Loaded from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(std::string("JSON parse error: ") + e.what());
    }
    Loaded L;
    Instance& in = L.instance;
    try {
        in.oriented = j.at("oriented").get<bool>();
        in.colors = j.at("colors").get<int>();
        bool numeric = false;
        std::vector<int8_t> tokens;
        for (const json& v : j.at("vertices")) {
            in.vertex_ids.push_back(id_string(v.at("id"), numeric));
            const json& t = v.at("token");
            tokens.push_back(t.is_null() ? NoToken : int8_t(parse_color(t, in.colors)));
        }
        in.numeric_ids = numeric;
        std::map<std::string, int> vix;
        for (int i = 0; i < in.num_vertices(); ++i)
            if (!vix.emplace(in.vertex_ids[i], i).second) throw std::runtime_error("duplicate vertex id " + in.vertex_ids[i]);
        auto vertex = [&](const json& x) {
            bool dummy = false;
            std::string s = id_string(x, dummy);
            auto it = vix.find(s);
            if (it == vix.end()) throw std::runtime_error("unknown vertex id " + s);
            return it->second;
        };
        std::map<std::string, int> eix;
        for (const json& e : j.at("edges")) {
            bool dummy = false;
            Edge ed;
            ed.id = id_string(e.at("id"), dummy);
            ed.tail = vertex(e.at("from"));
            ed.head = vertex(e.at("to"));
            ed.color = parse_color(e.at("color"), in.colors);
            if (!eix.emplace(ed.id, int(in.edges.size())).second) throw std::runtime_error("duplicate edge id " + ed.id);
            in.edges.push_back(ed);
        }
        in.rotation.assign(in.num_vertices(), {});
        for (auto& [vid, lst] : j.at("rotation").items()) {
            auto it = vix.find(vid);
            if (it == vix.end()) throw std::runtime_error("rotation names unknown vertex " + vid);
            for (const json& x : lst) {
                bool dummy = false;
                std::string s = id_string(x, dummy);
                auto ei = eix.find(s);
                if (ei == eix.end()) throw std::runtime_error("rotation names unknown edge " + s);
                in.rotation[it->second].push_back(ei->second);
            }
        }
        in.special = vertex(j.at("special"));
        in.target = vertex(j.at("target"));
        L.state.token = tokens;
        L.state.flipped.assign(in.edges.size(), 0);
        L.state.special = in.special;
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed instance: ") + e.what());
    }
    return L;
}

std::string to_json_text(const Instance& in, const State& s) {
    auto idj = [&](const std::string& id) -> json {
        if (in.numeric_ids) return json(std::stoll(id));
        return json(id);
    };
    json j;
    j["oriented"] = in.oriented;
    j["colors"] = in.colors;
    json vs = json::array();
    for (int v = 0; v < in.num_vertices(); ++v) {
        json t = s.token[v] == NoToken ? json(nullptr) : json(color_name(s.token[v]));
        vs.push_back({{"id", idj(in.vertex_ids[v])}, {"token", t}});
    }
    j["vertices"] = vs;
    json es = json::array();
    for (int e = 0; e < int(in.edges.size()); ++e) {
        int t = in.oriented ? tail_of(in, s, e) : in.edges[e].tail;
        int h = in.oriented ? head_of(in, s, e) : in.edges[e].head;
        es.push_back({{"id", idj(in.edges[e].id)},
                      {"from", idj(in.vertex_ids[t])},
                      {"to", idj(in.vertex_ids[h])},
                      {"color", color_name(in.edges[e].color)}});
    }
    j["edges"] = es;
    json rot = json::object();
    for (int v = 0; v < in.num_vertices(); ++v) {
        json l = json::array();
        for (int e : in.rotation[v]) l.push_back(idj(in.edges[e].id));
        rot[in.vertex_ids[v]] = l;
    }
    j["rotation"] = rot;
    j["special"] = idj(in.vertex_ids[s.special]);
    j["target"] = idj(in.vertex_ids[in.target]);
    return j.dump(2) + "\n";
}

}  // namespace pspace::subway
