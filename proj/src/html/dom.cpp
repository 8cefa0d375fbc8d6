#include "vaf/html/dom.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <stdexcept>

#include <fmt/format.h>

#include "vaf/error.hpp"

namespace vaf::html {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool is_space(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f';
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

constexpr std::array kVoidElements{"area", "base", "br",   "col",   "embed", "hr",  "img",
                                   "input", "link", "meta", "param", "source", "track", "wbr"};
constexpr std::array kRawTextElements{"script", "style", "textarea", "title"};
constexpr std::array kHiddenTextElements{"script", "style", "noscript", "template", "head"};

template <std::size_t N>
bool in(const std::array<const char*, N>& set, std::string_view tag) noexcept {
    return std::any_of(set.begin(), set.end(), [&](const char* s) { return tag == s; });
}

}  // namespace

bool is_void_element(std::string_view tag) noexcept { return in(kVoidElements, tag); }

// --- Node ------------------------------------------------------------------

Node::Node(NodeKind kind, std::string name_or_data) : kind_(kind) {
    if (kind == NodeKind::element) {
        tag_ = lower(name_or_data);
    } else {
        data_ = std::move(name_or_data);
    }
}

std::unique_ptr<Node> Node::make_element(std::string tag) {
    return std::make_unique<Node>(NodeKind::element, std::move(tag));
}

std::unique_ptr<Node> Node::make_text(std::string data) {
    return std::make_unique<Node>(NodeKind::text, std::move(data));
}

const std::string* Node::attribute(std::string_view name) const {
    for (const auto& a : attributes_) {
        if (a.name == name) return &a.value;
    }
    return nullptr;
}

void Node::set_attribute(std::string_view name, std::string value) {
    const std::string key = lower(name);
    for (auto& a : attributes_) {
        if (a.name == key) {
            a.value = std::move(value);
            return;
        }
    }
    attributes_.push_back({key, std::move(value)});
}

bool Node::remove_attribute(std::string_view name) {
    auto it = std::find_if(attributes_.begin(), attributes_.end(),
                           [&](const Attribute& a) { return a.name == name; });
    if (it == attributes_.end()) return false;
    attributes_.erase(it);
    return true;
}

bool Node::has_class(std::string_view cls) const {
    const std::string* classes = attribute("class");
    if (classes == nullptr) return false;
    std::string_view rest = *classes;
    while (!rest.empty()) {
        while (!rest.empty() && is_space(rest.front())) rest.remove_prefix(1);
        std::size_t end = 0;
        while (end < rest.size() && !is_space(rest[end])) ++end;
        if (rest.substr(0, end) == cls && end > 0) return true;
        rest.remove_prefix(end);
    }
    return false;
}

std::vector<Node*> Node::element_children() const {
    std::vector<Node*> out;
    for (const auto& c : children_) {
        if (c->is_element()) out.push_back(c.get());
    }
    return out;
}

std::size_t Node::index_in_parent() const {
    if (parent_ == nullptr) return 0;
    const auto& siblings = parent_->children_;
    for (std::size_t i = 0; i < siblings.size(); ++i) {
        if (siblings[i].get() == this) return i;
    }
    throw std::logic_error("node not found in its parent");
}

Node& Node::append_child(std::unique_ptr<Node> child) {
    return insert_child(children_.size(), std::move(child));
}

Node& Node::insert_child(std::size_t index, std::unique_ptr<Node> child) {
    if (child->contains(*this)) throw std::invalid_argument("cannot insert a node into its own subtree");
    child->parent_ = this;
    index = std::min(index, children_.size());
    auto it = children_.insert(children_.begin() + static_cast<std::ptrdiff_t>(index), std::move(child));
    return **it;
}

std::unique_ptr<Node> Node::detach() {
    if (parent_ == nullptr) throw std::logic_error("cannot detach a root node");
    auto& siblings = parent_->children_;
    const std::size_t i = index_in_parent();
    std::unique_ptr<Node> self = std::move(siblings[i]);
    siblings.erase(siblings.begin() + static_cast<std::ptrdiff_t>(i));
    parent_ = nullptr;
    return self;
}

std::unique_ptr<Node> Node::clone() const {
    auto copy = std::make_unique<Node>(kind_);
    copy->tag_ = tag_;
    copy->data_ = data_;
    copy->attributes_ = attributes_;
    copy->children_.reserve(children_.size());
    for (const auto& c : children_) {
        auto cc = c->clone();
        cc->parent_ = copy.get();
        copy->children_.push_back(std::move(cc));
    }
    return copy;
}

bool Node::contains(const Node& other) const noexcept {
    for (const Node* n = &other; n != nullptr; n = n->parent_) {
        if (n == this) return true;
    }
    return false;
}

// --- Document --------------------------------------------------------------

Document::Document() : root_(std::make_unique<Node>(NodeKind::document)) {}

Document::Document(std::unique_ptr<Node> root) : root_(std::move(root)) {
    if (!root_ || root_->kind() != NodeKind::document) throw std::invalid_argument("document root required");
}

Document::Document(const Document& other) : root_(other.root_->clone()) {}

Document& Document::operator=(const Document& other) {
    if (this != &other) root_ = other.root_->clone();
    return *this;
}

std::vector<Node*> Document::query_all(std::string_view selector) {
    std::vector<Node*> out;
    for (const Node* n : html::query_all(*root_, selector)) out.push_back(const_cast<Node*>(n));
    return out;
}

std::vector<const Node*> Document::query_all(std::string_view selector) const {
    return html::query_all(*root_, selector);
}

// --- parser ----------------------------------------------------------------

namespace {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Document run() {
        auto root = std::make_unique<Node>(NodeKind::document);
        stack_.push_back(root.get());
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<' && try_markup()) continue;
            text();
        }
        return Document(std::move(root));
    }

private:
    [[noreturn]] void fail(std::string_view what, std::size_t at) const {
        throw Error(Errc::HtmlParseError, fmt::format("{} at offset {}", what, at));
    }

    Node& current() { return *stack_.back(); }

    bool starts_with_ci(std::size_t at, std::string_view s) const {
        if (at + s.size() > src_.size()) return false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (std::tolower(static_cast<unsigned char>(src_[at + i])) != s[i]) return false;
        }
        return true;
    }

    void text() {
        const std::size_t start = pos_;
        ++pos_;
        while (pos_ < src_.size()) {
            if (src_[pos_] == '<' && pos_ + 1 < src_.size()) {
                const char n = src_[pos_ + 1];
                if (std::isalpha(static_cast<unsigned char>(n)) || n == '/' || n == '!' || n == '?') break;
            }
            ++pos_;
        }
        append_text(src_.substr(start, pos_ - start));
    }

    void append_text(std::string_view t) {
        Node& parent = current();
        if (parent.child_count() > 0) {
            Node& last = parent.child(parent.child_count() - 1);
            if (last.kind() == NodeKind::text) {
                last.set_data(last.data() + std::string(t));
                return;
            }
        }
        parent.append_child(Node::make_text(std::string(t)));
    }

    bool try_markup() {
        const std::size_t start = pos_;
        if (src_.compare(pos_, 4, "<!--") == 0) {
            const std::size_t end = src_.find("-->", pos_ + 4);
            if (end == std::string_view::npos) fail("unterminated comment", start);
            current().append_child(std::make_unique<Node>(NodeKind::comment,
                                                          std::string(src_.substr(pos_ + 4, end - pos_ - 4))));
            pos_ = end + 3;
            return true;
        }
        if (pos_ + 1 >= src_.size()) return false;
        const char n = src_[pos_ + 1];
        if (n == '!' || n == '?') {
            const std::size_t end = src_.find('>', pos_);
            if (end == std::string_view::npos) fail("unterminated declaration", start);
            const auto body = std::string(src_.substr(pos_ + 2, end - pos_ - 2));
            if (n == '!') {
                current().append_child(std::make_unique<Node>(NodeKind::doctype, body));
            } else {
                current().append_child(std::make_unique<Node>(NodeKind::comment, "?" + body));
            }
            pos_ = end + 1;
            return true;
        }
        if (n == '/') {
            if (pos_ + 2 >= src_.size() || !std::isalpha(static_cast<unsigned char>(src_[pos_ + 2]))) return false;
            pos_ += 2;
            const std::string name = lower(read_name());
            const std::size_t end = src_.find('>', pos_);
            if (end == std::string_view::npos) fail("unterminated end tag", start);
            pos_ = end + 1;
            close_element(name);
            return true;
        }
        if (!std::isalpha(static_cast<unsigned char>(n))) return false;
        ++pos_;
        start_tag(start);
        return true;
    }

    std::string_view read_name() {
        const std::size_t s = pos_;
        while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>' && src_[pos_] != '/' &&
               src_[pos_] != '=') {
            ++pos_;
        }
        return src_.substr(s, pos_ - s);
    }

    void skip_space() {
        while (pos_ < src_.size() && is_space(src_[pos_])) ++pos_;
    }

    void start_tag(std::size_t start) {
        auto element = Node::make_element(std::string(read_name()));
        bool self_closing = false;
        for (;;) {
            skip_space();
            if (pos_ >= src_.size()) fail("unterminated start tag", start);
            if (src_[pos_] == '>') {
                ++pos_;
                break;
            }
            if (src_[pos_] == '/') {
                ++pos_;
                skip_space();
                if (pos_ < src_.size() && src_[pos_] == '>') {
                    self_closing = true;
                    ++pos_;
                    break;
                }
                continue;
            }
            const std::string name = lower(read_name());
            if (name.empty()) {
                ++pos_;  // stray character such as a lone '='
                continue;
            }
            skip_space();
            std::string value;
            if (pos_ < src_.size() && src_[pos_] == '=') {
                ++pos_;
                skip_space();
                if (pos_ >= src_.size()) fail("unterminated attribute", start);
                const char q = src_[pos_];
                if (q == '"' || q == '\'') {
                    const std::size_t end = src_.find(q, pos_ + 1);
                    if (end == std::string_view::npos) fail("unterminated attribute quote", pos_);
                    value = std::string(src_.substr(pos_ + 1, end - pos_ - 1));
                    pos_ = end + 1;
                } else {
                    const std::size_t s = pos_;
                    while (pos_ < src_.size() && !is_space(src_[pos_]) && src_[pos_] != '>') ++pos_;
                    value = std::string(src_.substr(s, pos_ - s));
                }
            }
            if (element->attribute(name) == nullptr) element->set_attribute(name, std::move(value));
        }

        const std::string tag = element->tag();
        implicit_close(tag);
        Node& placed = current().append_child(std::move(element));
        if (self_closing || is_void_element(tag)) return;
        if (in(kRawTextElements, tag)) {
            const std::string closing = "</" + tag;
            std::size_t end = pos_;
            while (end < src_.size() && !starts_with_ci(end, closing)) ++end;
            if (end > pos_) placed.append_child(Node::make_text(std::string(src_.substr(pos_, end - pos_))));
            pos_ = end;
            if (pos_ < src_.size()) {
                const std::size_t gt = src_.find('>', pos_);
                if (gt == std::string_view::npos) fail("unterminated end tag", pos_);
                pos_ = gt + 1;
            }
            return;
        }
        stack_.push_back(&placed);
    }

    void implicit_close(const std::string& tag) {
        static constexpr std::array kClosesP{"address", "article", "aside", "blockquote", "div", "dl",
                                             "fieldset", "footer",  "form",  "h1", "h2", "h3", "h4", "h5",
                                             "h6",      "header",  "hr",    "main", "nav", "ol", "p",
                                             "section", "table",   "ul"};
        const auto open = [&]() -> std::string_view { return stack_.size() > 1 ? current().tag() : ""; };
        if (open() == "p" && in(kClosesP, tag)) stack_.pop_back();
        if (tag == "li" && open() == "li") stack_.pop_back();
        if (tag == "option" && open() == "option") stack_.pop_back();
        if ((tag == "td" || tag == "th" || tag == "tr") && (open() == "td" || open() == "th")) stack_.pop_back();
        if (tag == "tr" && open() == "tr") stack_.pop_back();
    }

    void close_element(const std::string& name) {
        for (std::size_t i = stack_.size(); i-- > 1;) {
            if (stack_[i]->tag() == name) {
                stack_.resize(i);
                return;
            }
        }
        // stray end tag: ignored
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::vector<Node*> stack_;
};

void serialize_into(const Node& node, std::string& out) {
    switch (node.kind()) {
        case NodeKind::document:
            for (const auto& c : node.children()) serialize_into(*c, out);
            return;
        case NodeKind::text:
            out += node.data();
            return;
        case NodeKind::comment:
            if (!node.data().empty() && node.data().front() == '?') {
                out += "<" + node.data() + ">";
            } else {
                out += "<!--" + node.data() + "-->";
            }
            return;
        case NodeKind::doctype:
            out += "<!" + node.data() + ">";
            return;
        case NodeKind::element:
            break;
    }
    out += '<';
    out += node.tag();
    for (const auto& a : node.attributes()) {
        out += ' ';
        out += a.name;
        out += "=\"";
        for (char c : a.value) {
            if (c == '"') {
                out += "&quot;";
            } else {
                out += c;
            }
        }
        out += '"';
    }
    out += '>';
    if (is_void_element(node.tag())) return;
    for (const auto& c : node.children()) serialize_into(*c, out);
    out += "</" + node.tag() + ">";
}

void collect_text(const Node& node, const Node* exclude, std::string& out) {
    if (&node == exclude) return;
    if (node.kind() == NodeKind::text) {
        out += node.data();
        out += ' ';
        return;
    }
    if (node.is_element() && in(kHiddenTextElements, node.tag())) return;
    if (node.kind() != NodeKind::element && node.kind() != NodeKind::document) return;
    for (const auto& c : node.children()) collect_text(*c, exclude, out);
}

}  // namespace

Document parse(std::string_view source) { return Parser(source).run(); }

std::string serialize(const Document& doc) { return serialize(doc.root()); }

std::string serialize(const Node& node) {
    std::string out;
    serialize_into(node, out);
    return out;
}

bool equal_trees(const Node& a, const Node& b) {
    if (a.kind() != b.kind() || a.tag() != b.tag() || a.data() != b.data() || a.attributes() != b.attributes() ||
        a.child_count() != b.child_count()) {
        return false;
    }
    for (std::size_t i = 0; i < a.child_count(); ++i) {
        if (!equal_trees(a.child(i), b.child(i))) return false;
    }
    return true;
}

std::string collapse_whitespace(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (char c : text) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += c;
    }
    return out;
}

std::string decode_entities(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] != '&') {
            out += text[i];
            continue;
        }
        const std::size_t semi = text.find(';', i);
        if (semi == std::string_view::npos || semi - i > 10) {
            out += '&';
            continue;
        }
        const std::string_view name = text.substr(i + 1, semi - i - 1);
        std::optional<unsigned long> cp;
        if (name == "amp") cp = '&';
        else if (name == "lt") cp = '<';
        else if (name == "gt") cp = '>';
        else if (name == "quot") cp = '"';
        else if (name == "apos" || name == "#39") cp = '\'';
        else if (name == "nbsp") cp = ' ';
        else if (name.size() > 1 && name[0] == '#') {
            try {
                const bool hex = name[1] == 'x' || name[1] == 'X';
                cp = std::stoul(std::string(name.substr(hex ? 2 : 1)), nullptr, hex ? 16 : 10);
            } catch (const std::exception&) {
                cp.reset();
            }
        }
        if (!cp) {
            out += '&';
            continue;
        }
        const unsigned long c = *cp;
        if (c < 0x80) {
            out += static_cast<char>(c);
        } else if (c < 0x800) {
            out += static_cast<char>(0xC0 | (c >> 6));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else if (c < 0x10000) {
            out += static_cast<char>(0xE0 | (c >> 12));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        } else {
            out += static_cast<char>(0xF0 | (c >> 18));
            out += static_cast<char>(0x80 | ((c >> 12) & 0x3F));
            out += static_cast<char>(0x80 | ((c >> 6) & 0x3F));
            out += static_cast<char>(0x80 | (c & 0x3F));
        }
        i = semi;
    }
    return out;
}

std::string visible_text(const Node& node, const Node* exclude) {
    std::string raw;
    collect_text(node, exclude, raw);
    return collapse_whitespace(decode_entities(raw));
}

std::string node_path(const Node& node) {
    std::vector<std::string> parts;
    for (const Node* n = &node; n != nullptr && n->parent() != nullptr; n = n->parent()) {
        std::size_t ordinal = 0;
        for (const auto& sib : n->parent()->children()) {
            if (sib->kind() == n->kind() && sib->tag() == n->tag()) ++ordinal;
            if (sib.get() == n) break;
        }
        const std::string name = n->is_element() ? n->tag() : n->kind() == NodeKind::text ? "text()" : "node()";
        parts.push_back(fmt::format("{}[{}]", name, ordinal));
    }
    std::string out;
    for (auto it = parts.rbegin(); it != parts.rend(); ++it) out += "/" + *it;
    return out.empty() ? "/" : out;
}

// --- selectors -------------------------------------------------------------

namespace {

bool is_ident_char(char c) noexcept {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
           static_cast<unsigned char>(c) >= 0x80;
}

class SelectorParser {
public:
    explicit SelectorParser(std::string_view s) : s_(s) {}

    std::vector<std::vector<Selector::Step>> run() {
        std::vector<std::vector<Selector::Step>> alternatives;
        std::vector<Selector::Step> steps;
        bool pending_child = false;
        skip();
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == ',') {
                if (steps.empty() || pending_child) fail("empty selector before ','");
                alternatives.push_back(std::move(steps));
                steps.clear();
                ++pos_;
                skip();
                continue;
            }
            if (c == '>') {
                if (steps.empty() || pending_child) fail("dangling '>'");
                pending_child = true;
                ++pos_;
                skip();
                continue;
            }
            Selector::Step step;
            step.compound = compound();
            step.child_of_previous = pending_child;
            pending_child = false;
            steps.push_back(std::move(step));
            skip();
        }
        if (steps.empty() || pending_child) fail("incomplete selector");
        alternatives.push_back(std::move(steps));
        return alternatives;
    }

private:
    [[noreturn]] void fail(std::string_view what) const {
        throw std::invalid_argument(fmt::format("bad selector '{}': {}", s_, what));
    }
    void skip() {
        while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
    }
    std::string ident() {
        const std::size_t start = pos_;
        while (pos_ < s_.size() && is_ident_char(s_[pos_])) ++pos_;
        if (pos_ == start) fail("identifier expected");
        return std::string(s_.substr(start, pos_ - start));
    }

    Selector::Compound compound() {
        Selector::Compound out;
        bool any = false;
        if (pos_ < s_.size() && (s_[pos_] == '*' || is_ident_char(s_[pos_]))) {
            out.tag = s_[pos_] == '*' ? (++pos_, std::string("*")) : lower(ident());
            any = true;
        }
        while (pos_ < s_.size()) {
            const char c = s_[pos_];
            if (c == '#') {
                ++pos_;
                out.id = ident();
            } else if (c == '.') {
                ++pos_;
                out.classes.push_back(ident());
            } else if (c == '[') {
                ++pos_;
                skip();
                std::string name = lower(ident());
                skip();
                std::optional<std::string> value;
                if (pos_ < s_.size() && s_[pos_] == '=') {
                    ++pos_;
                    skip();
                    if (pos_ < s_.size() && (s_[pos_] == '"' || s_[pos_] == '\'')) {
                        const char q = s_[pos_];
                        const std::size_t end = s_.find(q, pos_ + 1);
                        if (end == std::string_view::npos) fail("unterminated quote");
                        value = std::string(s_.substr(pos_ + 1, end - pos_ - 1));
                        pos_ = end + 1;
                    } else {
                        value = ident();
                    }
                    skip();
                }
                if (pos_ >= s_.size() || s_[pos_] != ']') fail("']' expected");
                ++pos_;
                out.attrs.emplace_back(std::move(name), std::move(value));
            } else {
                break;
            }
            any = true;
        }
        if (!any) fail("unexpected character");
        return out;
    }

    std::string_view s_;
    std::size_t pos_ = 0;
};

bool matches_compound(const Selector::Compound& c, const Node& n) {
    if (!n.is_element()) return false;
    if (!c.tag.empty() && c.tag != "*" && c.tag != n.tag()) return false;
    if (!c.id.empty()) {
        const std::string* id = n.attribute("id");
        if (id == nullptr || *id != c.id) return false;
    }
    for (const auto& cls : c.classes) {
        if (!n.has_class(cls)) return false;
    }
    for (const auto& [name, value] : c.attrs) {
        const std::string* v = n.attribute(name);
        if (v == nullptr) return false;
        if (value && *v != *value) return false;
    }
    return true;
}

bool matches_steps(const std::vector<Selector::Step>& steps, std::size_t i, const Node& n) {
    if (!matches_compound(steps[i].compound, n)) return false;
    if (i == 0) return true;
    if (steps[i].child_of_previous) {
        const Node* p = n.parent();
        return p != nullptr && matches_steps(steps, i - 1, *p);
    }
    for (const Node* p = n.parent(); p != nullptr; p = p->parent()) {
        if (matches_steps(steps, i - 1, *p)) return true;
    }
    return false;
}

void collect_matches(const Node& n, const Selector& sel, std::vector<const Node*>& out) {
    for (const auto& c : n.children()) {
        if (sel.matches(*c)) out.push_back(c.get());
        collect_matches(*c, sel, out);
    }
}

}  // namespace

Selector Selector::parse(std::string_view text) {
    Selector s;
    s.text_ = std::string(trim(text));
    s.alternatives_ = SelectorParser(s.text_).run();
    return s;
}

bool Selector::matches(const Node& node) const {
    return std::any_of(alternatives_.begin(), alternatives_.end(),
                       [&](const auto& steps) { return matches_steps(steps, steps.size() - 1, node); });
}

std::vector<const Node*> query_all(const Node& scope, const Selector& selector) {
    std::vector<const Node*> out;
    collect_matches(scope, selector, out);
    return out;
}

std::vector<const Node*> query_all(const Node& scope, std::string_view selector) {
    return query_all(scope, Selector::parse(selector));
}

// --- inline style ----------------------------------------------------------

InlineStyle InlineStyle::parse(std::string_view text) {
    InlineStyle style;
    std::size_t pos = 0;
    while (pos < text.size()) {
        // split on ';' outside parentheses and quotes (data URLs carry both)
        std::size_t end = pos;
        int depth = 0;
        char quote = 0;
        for (; end < text.size(); ++end) {
            const char c = text[end];
            if (quote != 0) {
                if (c == quote) quote = 0;
            } else if (c == '"' || c == '\'') {
                quote = c;
            } else if (c == '(') {
                ++depth;
            } else if (c == ')') {
                depth = std::max(0, depth - 1);
            } else if (c == ';' && depth == 0) {
                break;
            }
        }
        const std::string_view decl = text.substr(pos, end - pos);
        pos = end + 1;
        const std::size_t colon = decl.find(':');
        if (colon == std::string_view::npos) continue;
        const auto prop = lower(trim(decl.substr(0, colon)));
        const auto value = std::string(trim(decl.substr(colon + 1)));
        if (prop.empty()) continue;
        style.set(prop, value);
    }
    return style;
}

std::optional<std::string> InlineStyle::get(std::string_view property) const {
    for (const auto& [k, v] : declarations_) {
        if (k == property) return v;
    }
    return std::nullopt;
}

void InlineStyle::set(std::string_view property, std::string value) {
    const std::string key = lower(property);
    for (auto& [k, v] : declarations_) {
        if (k == key) {
            v = std::move(value);
            return;
        }
    }
    declarations_.emplace_back(key, std::move(value));
}

bool InlineStyle::remove(std::string_view property) {
    auto it = std::find_if(declarations_.begin(), declarations_.end(),
                           [&](const auto& d) { return d.first == property; });
    if (it == declarations_.end()) return false;
    declarations_.erase(it);
    return true;
}

std::string InlineStyle::serialize() const {
    std::string out;
    for (const auto& [k, v] : declarations_) {
        if (!out.empty()) out += ' ';
        out += k + ": " + v + ";";
    }
    return out;
}

InlineStyle inline_style_of(const Node& element) {
    const std::string* s = element.attribute("style");
    return s == nullptr ? InlineStyle{} : InlineStyle::parse(*s);
}

}  // namespace vaf::html
