#include "mservice/store.hpp"

#include <sqlite3.h>

#include <sstream>

#include "mservice/error.hpp"

namespace mservice {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS user_groups (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  permissions TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS users (
  id INTEGER PRIMARY KEY,
  username TEXT NOT NULL UNIQUE,
  password_hash TEXT NOT NULL,
  group_id INTEGER NOT NULL REFERENCES user_groups(id),
  display_name TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS subscribers (
  id INTEGER PRIMARY KEY,
  msisdn TEXT NOT NULL UNIQUE,
  registered_at INTEGER NOT NULL,
  status TEXT NOT NULL,
  consent_ads INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS categories (
  id INTEGER PRIMARY KEY,
  parent_id INTEGER REFERENCES categories(id),
  name_sw TEXT NOT NULL,
  position INTEGER NOT NULL,
  active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS content (
  id INTEGER PRIMARY KEY,
  category_id INTEGER NOT NULL REFERENCES categories(id),
  body_sw TEXT NOT NULL,
  author_id INTEGER NOT NULL REFERENCES users(id),
  created_at INTEGER NOT NULL,
  active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS questions (
  id INTEGER PRIMARY KEY,
  subscriber_id INTEGER NOT NULL REFERENCES subscribers(id),
  text TEXT NOT NULL,
  received_at INTEGER NOT NULL,
  status TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS answers (
  id INTEGER PRIMARY KEY,
  question_id INTEGER NOT NULL REFERENCES questions(id),
  doctor_id INTEGER NOT NULL REFERENCES users(id),
  text TEXT NOT NULL,
  answered_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS received_sms (
  id INTEGER PRIMARY KEY,
  msisdn TEXT NOT NULL,
  shortcode TEXT NOT NULL,
  text TEXT NOT NULL,
  received_at INTEGER NOT NULL,
  routed_as TEXT NOT NULL,
  outcome TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sponsors (
  id INTEGER PRIMARY KEY,
  name TEXT NOT NULL UNIQUE,
  contact TEXT NOT NULL,
  balance INTEGER NOT NULL CHECK (balance >= 0),
  active INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS ads (
  id INTEGER PRIMARY KEY,
  sponsor_id INTEGER NOT NULL REFERENCES sponsors(id),
  body_sw TEXT NOT NULL,
  active INTEGER NOT NULL,
  created_at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS ledger (
  id INTEGER PRIMARY KEY,
  sponsor_id INTEGER REFERENCES sponsors(id),
  subscriber_id INTEGER REFERENCES subscribers(id),
  amount INTEGER NOT NULL CHECK (amount >= 0),
  kind TEXT NOT NULL,
  confirmation_id INTEGER REFERENCES confirmations(id),
  at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS confirmations (
  id INTEGER PRIMARY KEY,
  code TEXT NOT NULL,
  msisdn TEXT NOT NULL,
  category_id INTEGER NOT NULL REFERENCES categories(id),
  ad_id INTEGER NOT NULL REFERENCES ads(id),
  sponsor_id INTEGER NOT NULL REFERENCES sponsors(id),
  issued_at INTEGER NOT NULL,
  expires_at INTEGER NOT NULL,
  state TEXT NOT NULL
);
CREATE UNIQUE INDEX IF NOT EXISTS confirmations_pending_code
  ON confirmations(code) WHERE state = 'Pending';
CREATE TABLE IF NOT EXISTS deliveries (
  id INTEGER PRIMARY KEY,
  msisdn TEXT NOT NULL,
  kind TEXT NOT NULL,
  segments INTEGER NOT NULL,
  cost INTEGER NOT NULL,
  body TEXT NOT NULL,
  at INTEGER NOT NULL,
  correlation_kind TEXT,
  correlation_id INTEGER,
  charset_warning INTEGER NOT NULL
);
CREATE INDEX IF NOT EXISTS deliveries_msisdn ON deliveries(msisdn);
CREATE TABLE IF NOT EXISTS payment_intents (
  id INTEGER PRIMARY KEY,
  msisdn TEXT NOT NULL,
  category_id INTEGER NOT NULL REFERENCES categories(id),
  amount INTEGER NOT NULL,
  at INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS audit_log (
  id INTEGER PRIMARY KEY,
  actor_id INTEGER,
  at INTEGER NOT NULL,
  method TEXT NOT NULL,
  path TEXT NOT NULL,
  entity TEXT NOT NULL,
  action TEXT NOT NULL,
  target_id INTEGER,
  summary TEXT NOT NULL,
  payload TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS auth_tokens (
  token TEXT PRIMARY KEY,
  user_id INTEGER NOT NULL REFERENCES users(id),
  issued_at INTEGER NOT NULL,
  expires_at INTEGER NOT NULL
);
)sql";

[[noreturn]] void fail(sqlite3* db, std::string_view what) {
  std::string msg(what);
  if (db) msg += std::string(": ") + sqlite3_errmsg(db);
  throw Error(ErrorCode::StorageFailure, msg);
}

/// Prepared statement with positional binding.
class Stmt {
 public:
  Stmt(sqlite3* db, std::string_view sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql.data(), static_cast<int>(sql.size()), &stmt_, nullptr) != SQLITE_OK)
      fail(db, "prepare");
  }
  ~Stmt() { sqlite3_finalize(stmt_); }
  Stmt(const Stmt&) = delete;
  Stmt& operator=(const Stmt&) = delete;

  Stmt& bind(std::int64_t v) {
    check(sqlite3_bind_int64(stmt_, ++slot_, v));
    return *this;
  }
  Stmt& bind(int v) { return bind(static_cast<std::int64_t>(v)); }
  Stmt& bind(std::size_t v) { return bind(static_cast<std::int64_t>(v)); }
  Stmt& bind(bool v) { return bind(static_cast<std::int64_t>(v ? 1 : 0)); }
  Stmt& bind(std::string_view v) {
    check(sqlite3_bind_text(stmt_, ++slot_, v.data(), static_cast<int>(v.size()), SQLITE_TRANSIENT));
    return *this;
  }
  Stmt& bind(const std::string& v) { return bind(std::string_view(v)); }
  Stmt& bind(const char* v) { return bind(std::string_view(v)); }
  Stmt& bind(Timestamp t) { return bind(to_unix(t)); }
  Stmt& bind(Money m) { return bind(m.tsh()); }
  template <class Tag>
  Stmt& bind(Id<Tag> id) {
    return bind(id.value);
  }
  template <class T>
  Stmt& bind(const std::optional<T>& v) {
    if (!v) {
      check(sqlite3_bind_null(stmt_, ++slot_));
      return *this;
    }
    return bind(*v);
  }

  /// True while a row is available.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    if (rc == SQLITE_CONSTRAINT) throw Error(ErrorCode::ValidationFailed, sqlite3_errmsg(db_));
    fail(db_, "step");
  }
  void exec() {
    while (step()) {
    }
  }

  [[nodiscard]] bool is_null(int col) const { return sqlite3_column_type(stmt_, col) == SQLITE_NULL; }
  [[nodiscard]] std::int64_t i64(int col) const { return sqlite3_column_int64(stmt_, col); }
  [[nodiscard]] bool boolean(int col) const { return i64(col) != 0; }
  [[nodiscard]] std::string text(int col) const {
    auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string{};
  }
  [[nodiscard]] Timestamp time(int col) const { return from_unix(i64(col)); }
  [[nodiscard]] Money money(int col) const { return Money(i64(col)); }
  template <class IdT>
  [[nodiscard]] IdT id(int col) const {
    return IdT(i64(col));
  }
  template <class IdT>
  [[nodiscard]] std::optional<IdT> opt_id(int col) const {
    if (is_null(col)) return std::nullopt;
    return IdT(i64(col));
  }

 private:
  void check(int rc) {
    if (rc != SQLITE_OK) fail(db_, "bind");
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
  int slot_ = 0;
};

template <class E, std::size_t N>
E enum_from(const std::string& s, const E (&values)[N]) {
  for (E v : values)
    if (to_string(v) == s) return v;
  throw Error(ErrorCode::StorageFailure, "unknown enum value '" + s + "'");
}

constexpr SubscriberStatus kSubscriberStatuses[] = {SubscriberStatus::Active, SubscriberStatus::Unsubscribed};
constexpr QuestionStatus kQuestionStatuses[] = {QuestionStatus::Open, QuestionStatus::Answered};
constexpr SmsRoute kRoutes[] = {SmsRoute::Registration, SmsRoute::Question, SmsRoute::ConfirmationCode,
                                SmsRoute::Unrecognized};
constexpr LedgerKind kLedgerKinds[] = {LedgerKind::ImpressionCharge, LedgerKind::Deposit,
                                       LedgerKind::RegistrationFee};
constexpr ConfirmationState kConfirmationStates[] = {ConfirmationState::Pending, ConfirmationState::Redeemed,
                                                     ConfirmationState::Expired};
constexpr SmsKind kSmsKinds[] = {SmsKind::Ad, SmsKind::Content, SmsKind::Answer, SmsKind::System};
constexpr Correlation::Kind kCorrelationKinds[] = {Correlation::Kind::Confirmation, Correlation::Kind::Question,
                                                   Correlation::Kind::Payment};

std::string join_permissions(const std::set<Permission>& perms) {
  std::string out;
  for (Permission p : perms) {
    if (!out.empty()) out += ',';
    out += to_string(p);
  }
  return out;
}

std::set<Permission> split_permissions(const std::string& s) {
  std::set<Permission> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ','))
    if (auto p = permission_from_string(item)) out.insert(*p);
  return out;
}

UserGroup read_group(const Stmt& s) {
  return UserGroup{s.id<UserGroupId>(0), s.text(1), split_permissions(s.text(2))};
}

User read_user(const Stmt& s) {
  return User{s.id<UserId>(0), s.text(1), s.text(2), s.id<UserGroupId>(3), s.text(4)};
}

Subscriber read_subscriber(const Stmt& s) {
  return Subscriber{s.id<SubscriberId>(0), Msisdn::parse(s.text(1)), s.time(2),
                    enum_from(s.text(3), kSubscriberStatuses), s.boolean(4)};
}

Category read_category(const Stmt& s) {
  return Category{s.id<CategoryId>(0), s.opt_id<CategoryId>(1), s.text(2), static_cast<int>(s.i64(3)),
                  s.boolean(4)};
}

ContentItem read_content(const Stmt& s) {
  return ContentItem{s.id<ContentId>(0), s.id<CategoryId>(1), s.text(2), s.id<UserId>(3), s.time(4),
                     s.boolean(5)};
}

Question read_question(const Stmt& s) {
  return Question{s.id<QuestionId>(0), s.id<SubscriberId>(1), s.text(2), s.time(3),
                  enum_from(s.text(4), kQuestionStatuses)};
}

Answer read_answer(const Stmt& s) {
  return Answer{s.id<AnswerId>(0), s.id<QuestionId>(1), s.id<UserId>(2), s.text(3), s.time(4)};
}

Sponsor read_sponsor(const Stmt& s) {
  return Sponsor{s.id<SponsorId>(0), s.text(1), s.text(2), s.money(3), s.boolean(4)};
}

Ad read_ad(const Stmt& s) {
  return Ad{s.id<AdId>(0), s.id<SponsorId>(1), s.text(2), s.boolean(3), s.time(4)};
}

LedgerEntry read_ledger(const Stmt& s) {
  return LedgerEntry{s.id<LedgerEntryId>(0),
                     s.opt_id<SponsorId>(1),
                     s.opt_id<SubscriberId>(2),
                     s.money(3),
                     enum_from(s.text(4), kLedgerKinds),
                     s.opt_id<ConfirmationId>(5),
                     s.time(6)};
}

PendingConfirmation read_confirmation(const Stmt& s) {
  return PendingConfirmation{s.id<ConfirmationId>(0), s.text(1),        Msisdn::parse(s.text(2)),
                             s.id<CategoryId>(3),     s.id<AdId>(4),     s.id<SponsorId>(5),
                             s.time(6),               s.time(7),         enum_from(s.text(8), kConfirmationStates)};
}

DeliveryRecord read_delivery(const Stmt& s) {
  std::optional<Correlation> corr;
  if (!s.is_null(7)) corr = Correlation{enum_from(s.text(7), kCorrelationKinds), s.i64(8)};
  return DeliveryRecord{s.id<DeliveryId>(0),
                        Msisdn::parse(s.text(1)),
                        enum_from(s.text(2), kSmsKinds),
                        static_cast<std::size_t>(s.i64(3)),
                        s.money(4),
                        s.text(5),
                        s.time(6),
                        corr,
                        s.boolean(9)};
}

ReceivedSms read_received(const Stmt& s) {
  return ReceivedSms{s.id<ReceivedSmsId>(0), s.text(1), s.text(2), s.text(3), s.time(4),
                     enum_from(s.text(5), kRoutes), s.text(6)};
}

AuditEntry read_audit(const Stmt& s) {
  std::optional<std::int64_t> target;
  if (!s.is_null(7)) target = s.i64(7);
  return AuditEntry{s.id<AuditId>(0), s.opt_id<UserId>(1), s.time(2), s.text(3), s.text(4),
                    s.text(5),        s.text(6),           target,    s.text(8), s.text(9)};
}

template <class T, class Reader>
std::vector<T> collect(Stmt& s, Reader read) {
  std::vector<T> out;
  while (s.step()) out.push_back(read(s));
  return out;
}

template <class T, class Reader>
std::optional<T> first(Stmt& s, Reader read) {
  if (s.step()) return read(s);
  return std::nullopt;
}

constexpr const char* kDeliveryCols =
    "id, msisdn, kind, segments, cost, body, at, correlation_kind, correlation_id, charset_warning";
constexpr const char* kConfirmationCols =
    "id, code, msisdn, category_id, ad_id, sponsor_id, issued_at, expires_at, state";

}  // namespace

struct Store::Impl {
  sqlite3* db = nullptr;
  int depth = 0;

  ~Impl() {
    if (db) sqlite3_close_v2(db);
  }

  void exec(const char* sql) {
    char* err = nullptr;
    if (sqlite3_exec(db, sql, nullptr, nullptr, &err) != SQLITE_OK) {
      std::string msg = err ? err : "exec";
      sqlite3_free(err);
      throw Error(ErrorCode::StorageFailure, msg);
    }
  }

  Stmt prepare(std::string_view sql) const { return Stmt(db, sql); }

  std::int64_t last_id() const { return sqlite3_last_insert_rowid(db); }

  std::size_t count(std::string_view sql) const {
    Stmt s(db, sql);
    s.step();
    return static_cast<std::size_t>(s.i64(0));
  }
};

Store::Store(const std::string& path) : impl_(std::make_unique<Impl>()) {
  int flags = SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE | SQLITE_OPEN_FULLMUTEX;
  if (sqlite3_open_v2(path.c_str(), &impl_->db, flags, nullptr) != SQLITE_OK) {
    std::string msg = impl_->db ? sqlite3_errmsg(impl_->db) : "open";
    throw Error(ErrorCode::StorageFailure, "cannot open '" + path + "': " + msg);
  }
  sqlite3_busy_timeout(impl_->db, 5000);
  impl_->exec("PRAGMA foreign_keys = ON;");
  if (path != ":memory:") impl_->exec("PRAGMA journal_mode = WAL;");
  impl_->exec(kSchema);
}

Store::~Store() = default;

void Store::begin() {
  if (impl_->depth == 0)
    impl_->exec("BEGIN IMMEDIATE;");
  else
    impl_->exec(("SAVEPOINT sp" + std::to_string(impl_->depth) + ";").c_str());
  ++impl_->depth;
}

void Store::commit() {
  --impl_->depth;
  if (impl_->depth == 0)
    impl_->exec("COMMIT;");
  else
    impl_->exec(("RELEASE sp" + std::to_string(impl_->depth) + ";").c_str());
}

void Store::rollback() {
  --impl_->depth;
  try {
    if (impl_->depth == 0) {
      impl_->exec("ROLLBACK;");
    } else {
      auto sp = "sp" + std::to_string(impl_->depth);
      impl_->exec(("ROLLBACK TO " + sp + "; RELEASE " + sp + ";").c_str());
    }
  } catch (const Error&) {
    // the original exception is the one worth reporting
  }
}

// ---------------------------------------------------------------- user groups

UserGroupId Store::insert_user_group(const UserGroup& g) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO user_groups(name, permissions) VALUES(?, ?)")
      .bind(g.name)
      .bind(join_permissions(g.permissions))
      .exec();
  return UserGroupId(impl_->last_id());
}

void Store::update_user_group(const UserGroup& g) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE user_groups SET name = ?, permissions = ? WHERE id = ?")
      .bind(g.name)
      .bind(join_permissions(g.permissions))
      .bind(g.id)
      .exec();
}

void Store::delete_user_group(UserGroupId id) {
  std::lock_guard lock(mutex_);
  impl_->prepare("DELETE FROM user_groups WHERE id = ?").bind(id).exec();
}

std::optional<UserGroup> Store::find_user_group(UserGroupId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, permissions FROM user_groups WHERE id = ?");
  s.bind(id);
  return first<UserGroup>(s, read_group);
}

std::optional<UserGroup> Store::find_user_group_by_name(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, permissions FROM user_groups WHERE name = ?");
  s.bind(name);
  return first<UserGroup>(s, read_group);
}

std::vector<UserGroup> Store::list_user_groups() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, permissions FROM user_groups ORDER BY id");
  return collect<UserGroup>(s, read_group);
}

std::size_t Store::count_users_in_group(UserGroupId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT COUNT(*) FROM users WHERE group_id = ?");
  s.bind(id).step();
  return static_cast<std::size_t>(s.i64(0));
}

// ---------------------------------------------------------------- users

UserId Store::insert_user(const User& u) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO users(username, password_hash, group_id, display_name) VALUES(?, ?, ?, ?)")
      .bind(u.username)
      .bind(u.password_hash)
      .bind(u.group)
      .bind(u.display_name)
      .exec();
  return UserId(impl_->last_id());
}

void Store::update_user(const User& u) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE users SET username = ?, password_hash = ?, group_id = ?, display_name = ? WHERE id = ?")
      .bind(u.username)
      .bind(u.password_hash)
      .bind(u.group)
      .bind(u.display_name)
      .bind(u.id)
      .exec();
}

void Store::delete_user(UserId id) {
  std::lock_guard lock(mutex_);
  impl_->prepare("DELETE FROM auth_tokens WHERE user_id = ?").bind(id).exec();
  impl_->prepare("DELETE FROM users WHERE id = ?").bind(id).exec();
}

std::optional<User> Store::find_user(UserId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, username, password_hash, group_id, display_name FROM users WHERE id = ?");
  s.bind(id);
  return first<User>(s, read_user);
}

std::optional<User> Store::find_user_by_username(const std::string& username) const {
  std::lock_guard lock(mutex_);
  auto s =
      impl_->prepare("SELECT id, username, password_hash, group_id, display_name FROM users WHERE username = ?");
  s.bind(username);
  return first<User>(s, read_user);
}

std::vector<User> Store::list_users() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, username, password_hash, group_id, display_name FROM users ORDER BY id");
  return collect<User>(s, read_user);
}

std::size_t Store::count_user_references(UserId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(
      "SELECT (SELECT COUNT(*) FROM content WHERE author_id = ?1) + "
      "(SELECT COUNT(*) FROM answers WHERE doctor_id = ?1)");
  s.bind(id).step();
  return static_cast<std::size_t>(s.i64(0));
}

// ---------------------------------------------------------------- subscribers

SubscriberId Store::insert_subscriber(const Subscriber& s) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO subscribers(msisdn, registered_at, status, consent_ads) VALUES(?, ?, ?, ?)")
      .bind(s.msisdn.value())
      .bind(s.registered_at)
      .bind(to_string(s.status))
      .bind(s.consent_ads)
      .exec();
  return SubscriberId(impl_->last_id());
}

void Store::update_subscriber(const Subscriber& s) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE subscribers SET registered_at = ?, status = ?, consent_ads = ? WHERE id = ?")
      .bind(s.registered_at)
      .bind(to_string(s.status))
      .bind(s.consent_ads)
      .bind(s.id)
      .exec();
}

std::optional<Subscriber> Store::find_subscriber(SubscriberId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, msisdn, registered_at, status, consent_ads FROM subscribers WHERE id = ?");
  s.bind(id);
  return first<Subscriber>(s, read_subscriber);
}

std::optional<Subscriber> Store::find_subscriber_by_msisdn(const Msisdn& m) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, msisdn, registered_at, status, consent_ads FROM subscribers WHERE msisdn = ?");
  s.bind(m.value());
  return first<Subscriber>(s, read_subscriber);
}

std::vector<Subscriber> Store::list_subscribers(std::size_t offset, std::size_t limit) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(
      "SELECT id, msisdn, registered_at, status, consent_ads FROM subscribers ORDER BY id LIMIT ? OFFSET ?");
  s.bind(limit).bind(offset);
  return collect<Subscriber>(s, read_subscriber);
}

std::size_t Store::count_subscribers(std::optional<SubscriberStatus> status) const {
  std::lock_guard lock(mutex_);
  if (!status) return impl_->count("SELECT COUNT(*) FROM subscribers");
  auto s = impl_->prepare("SELECT COUNT(*) FROM subscribers WHERE status = ?");
  s.bind(to_string(*status)).step();
  return static_cast<std::size_t>(s.i64(0));
}

// ---------------------------------------------------------------- categories

CategoryId Store::insert_category(const Category& c) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO categories(parent_id, name_sw, position, active) VALUES(?, ?, ?, ?)")
      .bind(c.parent)
      .bind(c.name_sw)
      .bind(c.position)
      .bind(c.active)
      .exec();
  return CategoryId(impl_->last_id());
}

void Store::update_category(const Category& c) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE categories SET parent_id = ?, name_sw = ?, position = ?, active = ? WHERE id = ?")
      .bind(c.parent)
      .bind(c.name_sw)
      .bind(c.position)
      .bind(c.active)
      .bind(c.id)
      .exec();
}

std::optional<Category> Store::find_category(CategoryId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, parent_id, name_sw, position, active FROM categories WHERE id = ?");
  s.bind(id);
  return first<Category>(s, read_category);
}

std::vector<Category> Store::list_categories() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, parent_id, name_sw, position, active FROM categories ORDER BY id");
  return collect<Category>(s, read_category);
}

std::vector<Category> Store::category_children(std::optional<CategoryId> parent, bool active_only) const {
  std::lock_guard lock(mutex_);
  std::string sql = "SELECT id, parent_id, name_sw, position, active FROM categories WHERE ";
  sql += parent ? "parent_id = ?" : "parent_id IS NULL";
  if (active_only) sql += " AND active = 1";
  sql += " ORDER BY position, id";
  auto s = impl_->prepare(sql);
  if (parent) s.bind(*parent);
  return collect<Category>(s, read_category);
}

// ---------------------------------------------------------------- content

ContentId Store::insert_content(const ContentItem& c) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO content(category_id, body_sw, author_id, created_at, active) VALUES(?, ?, ?, ?, ?)")
      .bind(c.category)
      .bind(c.body_sw)
      .bind(c.author)
      .bind(c.created_at)
      .bind(c.active)
      .exec();
  return ContentId(impl_->last_id());
}

void Store::update_content(const ContentItem& c) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE content SET category_id = ?, body_sw = ?, active = ? WHERE id = ?")
      .bind(c.category)
      .bind(c.body_sw)
      .bind(c.active)
      .bind(c.id)
      .exec();
}

std::optional<ContentItem> Store::find_content(ContentId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, category_id, body_sw, author_id, created_at, active FROM content WHERE id = ?");
  s.bind(id);
  return first<ContentItem>(s, read_content);
}

std::vector<ContentItem> Store::list_content(std::optional<CategoryId> category, bool active_only) const {
  std::lock_guard lock(mutex_);
  std::string sql = "SELECT id, category_id, body_sw, author_id, created_at, active FROM content WHERE 1 = 1";
  if (category) sql += " AND category_id = ?";
  if (active_only) sql += " AND active = 1";
  sql += " ORDER BY id";
  auto s = impl_->prepare(sql);
  if (category) s.bind(*category);
  return collect<ContentItem>(s, read_content);
}

std::size_t Store::count_active_content(CategoryId category) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT COUNT(*) FROM content WHERE category_id = ? AND active = 1");
  s.bind(category).step();
  return static_cast<std::size_t>(s.i64(0));
}

// ---------------------------------------------------------------- questions

QuestionId Store::insert_question(const Question& q) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO questions(subscriber_id, text, received_at, status) VALUES(?, ?, ?, ?)")
      .bind(q.subscriber)
      .bind(q.text)
      .bind(q.received_at)
      .bind(to_string(q.status))
      .exec();
  return QuestionId(impl_->last_id());
}

void Store::update_question_status(QuestionId id, QuestionStatus status) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE questions SET status = ? WHERE id = ?").bind(to_string(status)).bind(id).exec();
}

std::optional<Question> Store::find_question(QuestionId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, subscriber_id, text, received_at, status FROM questions WHERE id = ?");
  s.bind(id);
  return first<Question>(s, read_question);
}

std::vector<Question> Store::list_questions(std::optional<QuestionStatus> status) const {
  std::lock_guard lock(mutex_);
  std::string sql = "SELECT id, subscriber_id, text, received_at, status FROM questions";
  if (status) sql += " WHERE status = ?";
  sql += " ORDER BY id";
  auto s = impl_->prepare(sql);
  if (status) s.bind(to_string(*status));
  return collect<Question>(s, read_question);
}

std::size_t Store::count_questions(std::optional<QuestionStatus> status) const {
  return list_questions(status).size();
}

AnswerId Store::insert_answer(const Answer& a) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO answers(question_id, doctor_id, text, answered_at) VALUES(?, ?, ?, ?)")
      .bind(a.question)
      .bind(a.doctor)
      .bind(a.text)
      .bind(a.answered_at)
      .exec();
  return AnswerId(impl_->last_id());
}

std::vector<Answer> Store::answers_for(QuestionId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(
      "SELECT id, question_id, doctor_id, text, answered_at FROM answers WHERE question_id = ? ORDER BY id");
  s.bind(id);
  return collect<Answer>(s, read_answer);
}

std::vector<Answer> Store::list_answers() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, question_id, doctor_id, text, answered_at FROM answers ORDER BY id");
  return collect<Answer>(s, read_answer);
}

// ---------------------------------------------------------------- received sms

ReceivedSmsId Store::append_received_sms(const ReceivedSms& r) {
  std::lock_guard lock(mutex_);
  impl_
      ->prepare(
          "INSERT INTO received_sms(msisdn, shortcode, text, received_at, routed_as, outcome) "
          "VALUES(?, ?, ?, ?, ?, ?)")
      .bind(r.msisdn)
      .bind(r.shortcode)
      .bind(r.text)
      .bind(r.received_at)
      .bind(to_string(r.routed_as))
      .bind(r.outcome)
      .exec();
  return ReceivedSmsId(impl_->last_id());
}

std::vector<ReceivedSms> Store::list_received_sms() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(
      "SELECT id, msisdn, shortcode, text, received_at, routed_as, outcome FROM received_sms ORDER BY id");
  return collect<ReceivedSms>(s, read_received);
}

// ---------------------------------------------------------------- sponsors

SponsorId Store::insert_sponsor(const Sponsor& sp) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO sponsors(name, contact, balance, active) VALUES(?, ?, ?, ?)")
      .bind(sp.name)
      .bind(sp.contact)
      .bind(sp.balance)
      .bind(sp.active)
      .exec();
  return SponsorId(impl_->last_id());
}

void Store::update_sponsor(const Sponsor& sp) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE sponsors SET name = ?, contact = ?, balance = ?, active = ? WHERE id = ?")
      .bind(sp.name)
      .bind(sp.contact)
      .bind(sp.balance)
      .bind(sp.active)
      .bind(sp.id)
      .exec();
}

std::optional<Sponsor> Store::find_sponsor(SponsorId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, contact, balance, active FROM sponsors WHERE id = ?");
  s.bind(id);
  return first<Sponsor>(s, read_sponsor);
}

std::optional<Sponsor> Store::find_sponsor_by_name(const std::string& name) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, contact, balance, active FROM sponsors WHERE name = ?");
  s.bind(name);
  return first<Sponsor>(s, read_sponsor);
}

std::vector<Sponsor> Store::list_sponsors() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, name, contact, balance, active FROM sponsors ORDER BY id");
  return collect<Sponsor>(s, read_sponsor);
}

AdId Store::insert_ad(const Ad& a) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO ads(sponsor_id, body_sw, active, created_at) VALUES(?, ?, ?, ?)")
      .bind(a.sponsor)
      .bind(a.body_sw)
      .bind(a.active)
      .bind(a.created_at)
      .exec();
  return AdId(impl_->last_id());
}

void Store::update_ad(const Ad& a) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE ads SET body_sw = ?, active = ? WHERE id = ?").bind(a.body_sw).bind(a.active).bind(a.id).exec();
}

std::optional<Ad> Store::find_ad(AdId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, sponsor_id, body_sw, active, created_at FROM ads WHERE id = ?");
  s.bind(id);
  return first<Ad>(s, read_ad);
}

std::vector<Ad> Store::list_ads(std::optional<SponsorId> sponsor, bool active_only) const {
  std::lock_guard lock(mutex_);
  std::string sql = "SELECT id, sponsor_id, body_sw, active, created_at FROM ads WHERE 1 = 1";
  if (sponsor) sql += " AND sponsor_id = ?";
  if (active_only) sql += " AND active = 1";
  sql += " ORDER BY id";
  auto s = impl_->prepare(sql);
  if (sponsor) s.bind(*sponsor);
  return collect<Ad>(s, read_ad);
}

// ---------------------------------------------------------------- ledger

LedgerEntryId Store::append_ledger(const LedgerEntry& e) {
  std::lock_guard lock(mutex_);
  impl_
      ->prepare(
          "INSERT INTO ledger(sponsor_id, subscriber_id, amount, kind, confirmation_id, at) VALUES(?, ?, ?, ?, ?, ?)")
      .bind(e.sponsor)
      .bind(e.subscriber)
      .bind(e.amount)
      .bind(to_string(e.kind))
      .bind(e.confirmation)
      .bind(e.at)
      .exec();
  return LedgerEntryId(impl_->last_id());
}

std::vector<LedgerEntry> Store::list_ledger(std::optional<SponsorId> sponsor) const {
  std::lock_guard lock(mutex_);
  std::string sql = "SELECT id, sponsor_id, subscriber_id, amount, kind, confirmation_id, at FROM ledger";
  if (sponsor) sql += " WHERE sponsor_id = ?";
  sql += " ORDER BY id";
  auto s = impl_->prepare(sql);
  if (sponsor) s.bind(*sponsor);
  return collect<LedgerEntry>(s, read_ledger);
}

// ---------------------------------------------------------------- confirmations

ConfirmationId Store::insert_confirmation(const PendingConfirmation& c) {
  std::lock_guard lock(mutex_);
  impl_
      ->prepare(
          "INSERT INTO confirmations(code, msisdn, category_id, ad_id, sponsor_id, issued_at, expires_at, state) "
          "VALUES(?, ?, ?, ?, ?, ?, ?, ?)")
      .bind(c.code)
      .bind(c.msisdn.value())
      .bind(c.category)
      .bind(c.ad)
      .bind(c.sponsor)
      .bind(c.issued_at)
      .bind(c.expires_at)
      .bind(to_string(c.state))
      .exec();
  return ConfirmationId(impl_->last_id());
}

void Store::update_confirmation_state(ConfirmationId id, ConfirmationState st) {
  std::lock_guard lock(mutex_);
  impl_->prepare("UPDATE confirmations SET state = ? WHERE id = ?").bind(to_string(st)).bind(id).exec();
}

std::optional<PendingConfirmation> Store::find_confirmation(ConfirmationId id) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(std::string("SELECT ") + kConfirmationCols + " FROM confirmations WHERE id = ?");
  s.bind(id);
  return first<PendingConfirmation>(s, read_confirmation);
}

std::optional<PendingConfirmation> Store::find_confirmation_by_code(const std::string& code,
                                                                    ConfirmationState state) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(std::string("SELECT ") + kConfirmationCols +
                          " FROM confirmations WHERE code = ? AND state = ? ORDER BY id DESC LIMIT 1");
  s.bind(code).bind(to_string(state));
  return first<PendingConfirmation>(s, read_confirmation);
}

std::vector<PendingConfirmation> Store::list_confirmations() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(std::string("SELECT ") + kConfirmationCols + " FROM confirmations ORDER BY id");
  return collect<PendingConfirmation>(s, read_confirmation);
}

std::vector<PendingConfirmation> Store::list_pending_expired_by(Timestamp now) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(std::string("SELECT ") + kConfirmationCols +
                          " FROM confirmations WHERE state = 'Pending' AND expires_at <= ? ORDER BY id");
  s.bind(now);
  return collect<PendingConfirmation>(s, read_confirmation);
}

std::size_t Store::count_confirmations() const {
  std::lock_guard lock(mutex_);
  return impl_->count("SELECT COUNT(*) FROM confirmations");
}

// ---------------------------------------------------------------- deliveries

DeliveryId Store::append_delivery(const DeliveryRecord& d) {
  std::lock_guard lock(mutex_);
  std::optional<std::string> corr_kind;
  std::optional<std::int64_t> corr_id;
  if (d.correlation) {
    corr_kind = std::string(to_string(d.correlation->kind));
    corr_id = d.correlation->id;
  }
  impl_
      ->prepare(std::string("INSERT INTO deliveries(") + kDeliveryCols + ") VALUES(NULL, ?, ?, ?, ?, ?, ?, ?, ?, ?)")
      .bind(d.msisdn.value())
      .bind(to_string(d.kind))
      .bind(d.segments)
      .bind(d.cost)
      .bind(d.body)
      .bind(d.at)
      .bind(corr_kind)
      .bind(corr_id)
      .bind(d.charset_warning)
      .exec();
  return DeliveryId(impl_->last_id());
}

std::vector<DeliveryRecord> Store::list_deliveries(std::optional<Msisdn> msisdn, Period period) const {
  std::lock_guard lock(mutex_);
  std::string sql = std::string("SELECT ") + kDeliveryCols + " FROM deliveries WHERE 1 = 1";
  if (msisdn) sql += " AND msisdn = ?";
  if (period.from) sql += " AND at >= ?";
  if (period.to) sql += " AND at < ?";
  sql += " ORDER BY id";
  auto s = impl_->prepare(sql);
  if (msisdn) s.bind(msisdn->value());
  if (period.from) s.bind(*period.from);
  if (period.to) s.bind(*period.to);
  return collect<DeliveryRecord>(s, read_delivery);
}

std::size_t Store::count_deliveries(std::optional<SmsKind> kind) const {
  std::lock_guard lock(mutex_);
  if (!kind) return impl_->count("SELECT COUNT(*) FROM deliveries");
  auto s = impl_->prepare("SELECT COUNT(*) FROM deliveries WHERE kind = ?");
  s.bind(to_string(*kind)).step();
  return static_cast<std::size_t>(s.i64(0));
}

std::vector<DeliveryRecord> Store::deliveries_correlated(Correlation c) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(std::string("SELECT ") + kDeliveryCols +
                          " FROM deliveries WHERE correlation_kind = ? AND correlation_id = ? ORDER BY id");
  s.bind(to_string(c.kind)).bind(c.id);
  return collect<DeliveryRecord>(s, read_delivery);
}

// ---------------------------------------------------------------- payment intents

PaymentIntentId Store::insert_payment_intent(const PaymentIntent& p) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO payment_intents(msisdn, category_id, amount, at) VALUES(?, ?, ?, ?)")
      .bind(p.msisdn.value())
      .bind(p.category)
      .bind(p.amount)
      .bind(p.at)
      .exec();
  return PaymentIntentId(impl_->last_id());
}

std::vector<PaymentIntent> Store::list_payment_intents() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT id, msisdn, category_id, amount, at FROM payment_intents ORDER BY id");
  return collect<PaymentIntent>(s, [](const Stmt& r) {
    return PaymentIntent{r.id<PaymentIntentId>(0), Msisdn::parse(r.text(1)), r.id<CategoryId>(2), r.money(3),
                         r.time(4)};
  });
}

// ---------------------------------------------------------------- audit

AuditId Store::append_audit(const AuditEntry& a) {
  std::lock_guard lock(mutex_);
  impl_
      ->prepare(
          "INSERT INTO audit_log(actor_id, at, method, path, entity, action, target_id, summary, payload) "
          "VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?)")
      .bind(a.actor)
      .bind(a.at)
      .bind(a.method)
      .bind(a.path)
      .bind(a.entity)
      .bind(a.action)
      .bind(a.target)
      .bind(a.summary)
      .bind(a.payload)
      .exec();
  return AuditId(impl_->last_id());
}

std::vector<AuditEntry> Store::list_audit() const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare(
      "SELECT id, actor_id, at, method, path, entity, action, target_id, summary, payload FROM audit_log ORDER BY id");
  return collect<AuditEntry>(s, read_audit);
}

// ---------------------------------------------------------------- tokens

void Store::insert_token(const AuthToken& t) {
  std::lock_guard lock(mutex_);
  impl_->prepare("INSERT INTO auth_tokens(token, user_id, issued_at, expires_at) VALUES(?, ?, ?, ?)")
      .bind(t.token)
      .bind(t.user)
      .bind(t.issued_at)
      .bind(t.expires_at)
      .exec();
}

std::optional<AuthToken> Store::find_token(const std::string& token) const {
  std::lock_guard lock(mutex_);
  auto s = impl_->prepare("SELECT token, user_id, issued_at, expires_at FROM auth_tokens WHERE token = ?");
  s.bind(token);
  return first<AuthToken>(s, [](const Stmt& r) {
    return AuthToken{r.text(0), r.id<UserId>(1), r.time(2), r.time(3)};
  });
}

std::size_t Store::delete_tokens_expired_by(Timestamp now) {
  std::lock_guard lock(mutex_);
  impl_->prepare("DELETE FROM auth_tokens WHERE expires_at <= ?").bind(now).exec();
  return static_cast<std::size_t>(sqlite3_changes(impl_->db));
}

}  // namespace mservice
