#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vaf::html {

enum class NodeKind { document, element, text, comment, doctype };

struct Attribute {
    std::string name;
    std::string value;

    bool operator==(const Attribute&) const = default;
};

/// A node of a lenient HTML tree. Element names and attribute names are
/// stored lower-cased; text is stored verbatim (entities undecoded) so that
/// serialization reproduces the input byte-for-byte where the input was
/// already well formed.
class Node {
public:
    explicit Node(NodeKind kind, std::string name_or_data = {});

    Node(const Node&) = delete;
    Node& operator=(const Node&) = delete;

    static std::unique_ptr<Node> make_element(std::string tag);
    static std::unique_ptr<Node> make_text(std::string data);

    [[nodiscard]] NodeKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_element() const noexcept { return kind_ == NodeKind::element; }
    [[nodiscard]] const std::string& tag() const noexcept { return tag_; }
    [[nodiscard]] const std::string& data() const noexcept { return data_; }
    void set_data(std::string data) { data_ = std::move(data); }

    [[nodiscard]] const std::vector<Attribute>& attributes() const noexcept { return attributes_; }
    [[nodiscard]] const std::string* attribute(std::string_view name) const;
    void set_attribute(std::string_view name, std::string value);
    bool remove_attribute(std::string_view name);
    [[nodiscard]] bool has_class(std::string_view cls) const;

    [[nodiscard]] Node* parent() const noexcept { return parent_; }
    [[nodiscard]] std::size_t child_count() const noexcept { return children_.size(); }
    [[nodiscard]] Node& child(std::size_t i) const { return *children_.at(i); }
    [[nodiscard]] std::span<const std::unique_ptr<Node>> children() const noexcept { return children_; }
    [[nodiscard]] std::vector<Node*> element_children() const;
    [[nodiscard]] std::size_t index_in_parent() const;

    Node& append_child(std::unique_ptr<Node> child);
    Node& insert_child(std::size_t index, std::unique_ptr<Node> child);
    /// Removes this node from its parent and hands ownership to the caller.
    std::unique_ptr<Node> detach();

    [[nodiscard]] std::unique_ptr<Node> clone() const;
    [[nodiscard]] bool contains(const Node& other) const noexcept;

private:
    NodeKind kind_;
    std::string tag_;
    std::string data_;
    std::vector<Attribute> attributes_;
    std::vector<std::unique_ptr<Node>> children_;
    Node* parent_ = nullptr;
};

/// Owning document with deep-copy value semantics.
class Document {
public:
    Document();
    explicit Document(std::unique_ptr<Node> root);
    Document(const Document& other);
    Document& operator=(const Document& other);
    Document(Document&&) noexcept = default;
    Document& operator=(Document&&) noexcept = default;
    ~Document() = default;

    [[nodiscard]] Node& root() noexcept { return *root_; }
    [[nodiscard]] const Node& root() const noexcept { return *root_; }

    [[nodiscard]] std::vector<Node*> query_all(std::string_view selector);
    [[nodiscard]] std::vector<const Node*> query_all(std::string_view selector) const;

private:
    std::unique_ptr<Node> root_;
};

/// Parses an HTML document. Unclosed elements at EOF are closed implicitly;
/// an unterminated tag, attribute quote, or comment is fatal and throws
/// vaf::Error(HtmlParseError) naming the byte offset.
Document parse(std::string_view source);

std::string serialize(const Document& doc);
std::string serialize(const Node& node);

/// Structural equality: same kinds, tags, attributes (in order) and data.
bool equal_trees(const Node& a, const Node& b);

/// Human-visible text under `node` with character references decoded and
/// whitespace collapsed to single spaces. `exclude` (if inside the subtree)
/// is skipped together with its descendants.
std::string visible_text(const Node& node, const Node* exclude = nullptr);

std::string collapse_whitespace(std::string_view text);
std::string decode_entities(std::string_view text);

/// XPath-like location such as `/html[1]/body[1]/div[3]`.
std::string node_path(const Node& node);

bool is_void_element(std::string_view tag) noexcept;

// --- selectors -------------------------------------------------------------

/// Compiled subset of CSS selectors: type, `*`, `#id`, `.class`,
/// `[attr]`, `[attr=value]`, descendant and child (`>`) combinators, and
/// comma-separated lists.
class Selector {
public:
    static Selector parse(std::string_view text);

    [[nodiscard]] bool matches(const Node& node) const;
    [[nodiscard]] const std::string& text() const noexcept { return text_; }

    struct Compound {
        std::string tag;  // empty or "*" means any
        std::string id;
        std::vector<std::string> classes;
        std::vector<std::pair<std::string, std::optional<std::string>>> attrs;
    };
    struct Step {
        Compound compound;
        bool child_of_previous = false;  // '>' combinator before this step
    };

private:
    std::string text_;
    std::vector<std::vector<Step>> alternatives_;
};

std::vector<const Node*> query_all(const Node& scope, const Selector& selector);
std::vector<const Node*> query_all(const Node& scope, std::string_view selector);

// --- inline style ----------------------------------------------------------

/// Ordered `property: value` declarations of a `style` attribute.
class InlineStyle {
public:
    InlineStyle() = default;
    static InlineStyle parse(std::string_view text);

    [[nodiscard]] std::optional<std::string> get(std::string_view property) const;
    /// Replaces an existing declaration in place or appends a new one.
    void set(std::string_view property, std::string value);
    bool remove(std::string_view property);
    [[nodiscard]] bool empty() const noexcept { return declarations_.empty(); }
    [[nodiscard]] const std::vector<std::pair<std::string, std::string>>& declarations() const noexcept {
        return declarations_;
    }
    [[nodiscard]] std::string serialize() const;

private:
    std::vector<std::pair<std::string, std::string>> declarations_;
};

InlineStyle inline_style_of(const Node& element);

}  // namespace vaf::html
