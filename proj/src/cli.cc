/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "minilake/cli.h"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "minilake/csv.h"
#include "minilake/error.h"
#include "minilake/maintenance.h"
#include "minilake/scan.h"
#include "minilake/scd.h"
#include "minilake/transaction.h"
#include "minilake/warehouse.h"
#include "util.h"

namespace minilake {

namespace {

struct Flags {
  std::string root;
  std::string branch;
  std::string author = "minilake";
  std::string message;

  std::string table;
  std::string name;
  std::string schema;
  std::string partition;
  std::string csv_path;
  std::vector<std::string> select;
  std::string where;
  std::optional<std::int64_t> at_snapshot;
  std::string as_of;
  std::string at_commit;
  std::vector<std::string> add_columns;
  std::vector<std::string> drop_columns;
  std::vector<std::string> rename_columns;
  std::string spec;
  std::string from;
  std::string source;
  std::string into;
  std::int64_t to_snapshot = 0;
  std::optional<std::int64_t> target_file_size;
  std::string older_than;
  std::int64_t keep_last = 1;
  std::optional<std::int64_t> grace_ms;
  std::string keys;
  std::string tracked;
  std::string txn_ts;
  std::string effective_from = "effective_from";
  std::string effective_to = "effective_to";
  std::string is_current = "is_current";
  std::string fact;
  std::string fk;
  std::string dim;
  std::string dim_key;
};

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Throw(ErrorCode::kNotFound, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) Throw(ErrorCode::kIoError, "cannot read " + path);
  return buffer.str();
}

std::vector<std::string> SplitList(std::string_view text) {
  std::vector<std::string> out;
  for (auto part : SplitTopLevel(text, ',')) {
    const auto item = Trim(part);
    if (item.empty()) Throw(ErrorCode::kInvalidArgument, "empty item in list '" + std::string(text) + "'");
    out.emplace_back(item);
  }
  return out;
}

/// Milliseconds since the epoch, or an ISO-8601 UTC timestamp.
std::int64_t ParseInstantMs(std::string_view text) {
  std::int64_t ms = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), ms);
  if (ec == std::errc() && ptr == text.data() + text.size()) return ms;
  if (auto ts = ParseTimestamp(text)) return FloorDiv(ts->micros, 1000);
  Throw(ErrorCode::kInvalidArgument,
        "expected epoch milliseconds or YYYY-MM-DDTHH:MM:SS[.ffffff]Z, got '" + std::string(text) + "'");
}

std::string JoinChanges(const CatalogCommit& commit) {
  if (commit.change_summary.empty()) return "-";
  std::string out;
  for (const auto& e : commit.change_summary) {
    if (!out.empty()) out += ',';
    out += e.table + ":" + e.operation;
  }
  return out;
}

std::string FirstLine(const std::string& text) { return text.substr(0, text.find('\n')); }

class Runner {
 public:
  Runner(const Flags& flags, std::ostream& out) : flags_(flags), out_(out) {}

  void Init() {
    Warehouse warehouse(flags_.root);
    warehouse.catalog().Init(warehouse.config().default_branch);
    out_ << "initialized " << flags_.root << "\n";
    out_ << "branch=" << warehouse.config().default_branch << "\n";
  }

  void TableCreate() {
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    tx.CreateTable(flags_.name, ParseSchemaText(flags_.schema), ParsePartitionText(flags_.partition));
    Commit(tx, "create table " + flags_.name);
  }

  void Tables() {
    Warehouse warehouse = Open();
    for (const auto& name : warehouse.catalog().ListTables(Branch(warehouse))) out_ << name << "\n";
  }

  void Ingest() {
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    const CsvTable csv = ParseCsv(ReadFile(flags_.csv_path));
    const auto rows = CsvToRows(csv, tx.Metadata(flags_.table).CurrentSchema());
    tx.Append(flags_.table, rows);
    out_ << "rows=" << rows.size() << "\n";
    if (tx.HasStagedChanges()) Commit(tx, "ingest " + flags_.table);
  }

  void Scan() {
    Warehouse warehouse = Open();
    SnapshotSelector selector;
    if (flags_.at_snapshot) selector = SnapshotSelector::AtSnapshot(*flags_.at_snapshot);
    if (!flags_.as_of.empty()) selector = SnapshotSelector::AsOf(ParseInstantMs(flags_.as_of));
    if (!flags_.at_commit.empty()) selector = SnapshotSelector::AtCommit(flags_.at_commit);
    std::vector<std::string> columns;
    for (const auto& item : flags_.select) {
      for (auto& c : SplitList(item)) columns.push_back(std::move(c));
    }
    const ScanResult result = ScanTable(warehouse.catalog(), flags_.table, Branch(warehouse),
                                        selector, flags_.where, columns);
    out_ << RowsToCsv(result.columns, result.rows);
  }

  void Delete() {
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    const std::int64_t deleted = tx.Delete(flags_.table, std::string_view(flags_.where));
    out_ << "deleted=" << deleted << "\n";
    if (tx.HasStagedChanges()) Commit(tx, "delete from " + flags_.table + " where " + flags_.where);
  }

  void SchemaEvolve() {
    std::vector<SchemaChange> changes;
    for (const auto& name : flags_.drop_columns) changes.push_back(SchemaChange::Drop(name));
    for (const auto& item : flags_.rename_columns) {
      const size_t colon = item.find(':');
      if (colon == std::string::npos) {
        Throw(ErrorCode::kInvalidArgument, "--rename expects old:new, got '" + item + "'");
      }
      changes.push_back(SchemaChange::Rename(item.substr(0, colon), item.substr(colon + 1)));
    }
    for (const auto& item : flags_.add_columns) {
      const Schema parsed = ParseSchemaText(item);
      for (const auto& field : parsed.fields) {
        if (field.required) {
          Throw(ErrorCode::kSchemaViolation, "added column " + field.name + " cannot be required");
        }
        changes.push_back(SchemaChange::Add(field.name, field.type));
      }
    }
    if (changes.empty()) Throw(ErrorCode::kInvalidArgument, "no schema changes given");
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    tx.ChangeSchema(flags_.table, changes);
    Commit(tx, "evolve schema of " + flags_.table);
  }

  void PartitionEvolve() {
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    tx.ChangePartitionSpec(flags_.table, ParsePartitionText(flags_.spec));
    Commit(tx, "evolve partition spec of " + flags_.table);
  }

  void Snapshots() {
    Warehouse warehouse = Open();
    const CatalogCommit head = warehouse.catalog().Resolve(Branch(warehouse));
    const TableMetadata metadata = warehouse.catalog().LookupTable(head, flags_.table);
    out_ << "snapshot_id,parent_id,timestamp_ms,operation,added_files,deleted_files,added_rows,"
            "deleted_rows,current\n";
    for (const auto& s : metadata.snapshots) {
      out_ << s.snapshot_id << "," << (s.parent_id ? std::to_string(*s.parent_id) : "") << ","
           << s.timestamp_ms << "," << SnapshotOperationName(s.operation) << ","
           << s.summary.added_files << "," << s.summary.deleted_files << ","
           << s.summary.added_rows << "," << s.summary.deleted_rows << ","
           << (metadata.current_snapshot_id == s.snapshot_id ? "true" : "false") << "\n";
    }
  }

  void BranchCreate() {
    Warehouse warehouse = Open();
    const std::string from = flags_.from.empty() ? Branch(warehouse) : flags_.from;
    warehouse.catalog().CreateBranch(flags_.name, from);
    out_ << "branch=" << flags_.name << "\n";
    out_ << "commit=" << warehouse.catalog().BranchHead(flags_.name) << "\n";
  }

  void BranchList() {
    Warehouse warehouse = Open();
    for (const auto& name : warehouse.catalog().ListBranches()) out_ << name << "\n";
  }

  void TagCreate() {
    Warehouse warehouse = Open();
    const std::string at = flags_.from.empty() ? Branch(warehouse) : flags_.from;
    const CatalogCommit commit = warehouse.catalog().Resolve(at);
    warehouse.catalog().CreateTag(flags_.name, commit.hash);
    out_ << "tag=" << flags_.name << "\n";
    out_ << "commit=" << commit.hash << "\n";
  }

  void TagList() {
    Warehouse warehouse = Open();
    for (const auto& name : warehouse.catalog().ListTags()) out_ << name << "\n";
  }

  void Merge() {
    Warehouse warehouse = Open();
    const std::string message =
        flags_.message.empty() ? "merge " + flags_.source + " into " + flags_.into : flags_.message;
    const std::string hash = warehouse.catalog().Merge(flags_.source, flags_.into, flags_.author, message);
    out_ << "commit=" << hash << "\n";
  }

  void Log() {
    Warehouse warehouse = Open();
    std::optional<std::string_view> filter;
    if (!flags_.table.empty()) filter = flags_.table;
    for (const auto& c : warehouse.catalog().Log(Branch(warehouse), filter)) {
      out_ << c.hash << "\t" << c.timestamp_ms << "\t" << c.author << "\t" << JoinChanges(c)
           << "\t" << FirstLine(c.message) << "\n";
    }
  }

  void Rollback() {
    Warehouse warehouse = Open();
    Transaction tx(warehouse.catalog(), Branch(warehouse));
    tx.Rollback(flags_.table, flags_.to_snapshot);
    Commit(tx, "roll back " + flags_.table + " to snapshot " + std::to_string(flags_.to_snapshot));
  }

  void Compact() {
    Warehouse warehouse = Open();
    const auto target = flags_.target_file_size.value_or(warehouse.config().target_file_size_bytes);
    out_ << minilake::Compact(warehouse.catalog(), flags_.table, Branch(warehouse), target).ToText();
  }

  void ExpireSnapshots() {
    Warehouse warehouse = Open();
    out_ << ExpireTableSnapshots(warehouse.catalog(), flags_.table, Branch(warehouse),
                                 ParseInstantMs(flags_.older_than), flags_.keep_last)
                .ToText();
  }

  void Gc() {
    Warehouse warehouse = Open();
    const auto grace = flags_.grace_ms.value_or(warehouse.config().gc_grace_ms);
    out_ << RemoveOrphanFiles(warehouse.catalog(), flags_.table, grace, NowMs()).ToText();
  }

  void Scd2() {
    Warehouse warehouse = Open();
    const std::string branch = Branch(warehouse);
    const CatalogCommit head = warehouse.catalog().Resolve(branch);
    const Schema dim_schema = warehouse.catalog().LookupTable(head, flags_.table).CurrentSchema();
    const CsvTable csv = ParseCsv(ReadFile(flags_.source));
    // Parse source cells with the dimension's column types.
    Schema source_schema;
    for (const auto& name : csv.header) source_schema.fields.push_back(dim_schema.FieldNamed(name));
    for (auto& f : source_schema.fields) f.required = false;
    Scd2Source source;
    source.columns = csv.header;
    source.rows = CsvToRows(csv, source_schema);

    Scd2Config config;
    config.key_columns = SplitList(flags_.keys);
    config.tracked_columns = SplitList(flags_.tracked);
    config.effective_from = flags_.effective_from;
    config.effective_to = flags_.effective_to;
    config.is_current = flags_.is_current;
    Timestamp ts{NowMs() * 1000};
    if (!flags_.txn_ts.empty()) {
      auto parsed = ParseTimestamp(flags_.txn_ts);
      if (!parsed) Throw(ErrorCode::kInvalidArgument, "malformed --ts '" + flags_.txn_ts + "'");
      ts = *parsed;
    }
    const Scd2Result result =
        Scd2Merge(warehouse.catalog(), flags_.table, branch, source, config, ts);
    out_ << "inserted=" << result.inserted << "\n";
    out_ << "closed=" << result.closed << "\n";
    out_ << "unchanged=" << result.unchanged << "\n";
    if (!result.commit.empty()) out_ << "commit=" << result.commit << "\n";
  }

  void CheckRi() {
    Warehouse warehouse = Open();
    const auto orphans = CheckReferentialIntegrity(warehouse.catalog(), flags_.fact, flags_.fk,
                                                   flags_.dim, flags_.dim_key, Branch(warehouse));
    out_ << "orphans=" << orphans.size() << "\n";
    for (const auto& v : orphans) out_ << FormatValue(v) << "\n";
  }

 private:
  Warehouse Open() const {
    if (!std::filesystem::is_directory(std::filesystem::path(flags_.root) / "refs")) {
      Throw(ErrorCode::kNotFound, "no warehouse at " + flags_.root + " (run init first)");
    }
    return Warehouse(flags_.root);
  }

  std::string Branch(const Warehouse& warehouse) const {
    return flags_.branch.empty() ? warehouse.config().default_branch : flags_.branch;
  }

  void Commit(Transaction& tx, const std::string& default_message) {
    const std::string message = flags_.message.empty() ? default_message : flags_.message;
    out_ << "commit=" << tx.Commit(flags_.author, message) << "\n";
  }

  const Flags& flags_;
  std::ostream& out_;
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Flags flags;
  CLI::App app{"minilake: a single-node data lakehouse", "minilake"};
  app.require_subcommand(1);
  app.add_option("--root", flags.root, "Warehouse directory")->envname("MINILAKE_ROOT");
  app.add_option("--branch", flags.branch, "Branch to read and write (default from config)");
  app.add_option("--author", flags.author, "Author recorded on commits");
  app.add_option("-m,--message", flags.message, "Commit message");
  app.fallthrough();

  auto* init = app.add_subcommand("init", "Create an empty warehouse");

  auto* table = app.add_subcommand("table", "Table management");
  table->require_subcommand(1);
  auto* table_create = table->add_subcommand("create", "Create a table");
  table_create->add_option("--name", flags.name)->required();
  table_create->add_option("--schema", flags.schema, "name:type[:required],...")->required();
  table_create->add_option("--partition", flags.partition, "e.g. day(ts),bucket(16,id)");

  auto* tables = app.add_subcommand("tables", "List tables on the branch");

  auto* ingest = app.add_subcommand("ingest", "Append rows from a CSV file");
  ingest->add_option("--table", flags.table)->required();
  ingest->add_option("--csv", flags.csv_path)->required();

  auto* scan = app.add_subcommand("scan", "Print matching rows as CSV");
  scan->add_option("--table", flags.table)->required();
  scan->add_option("--select", flags.select, "Comma-separated columns");
  scan->add_option("--where", flags.where, "Conjunctive predicate");
  auto* at_snapshot = scan->add_option("--at-snapshot", flags.at_snapshot);
  auto* as_of = scan->add_option("--as-of", flags.as_of, "Epoch ms or ISO-8601 UTC");
  auto* at_commit = scan->add_option("--at-commit", flags.at_commit);
  at_snapshot->excludes(as_of)->excludes(at_commit);
  as_of->excludes(at_commit);

  auto* del = app.add_subcommand("delete", "Delete matching rows");
  del->add_option("--table", flags.table)->required();
  del->add_option("--where", flags.where)->required();

  auto* schema = app.add_subcommand("schema", "Schema evolution");
  schema->require_subcommand(1);
  auto* schema_evolve = schema->add_subcommand("evolve", "Add, drop or rename columns");
  schema_evolve->add_option("--table", flags.table)->required();
  schema_evolve->add_option("--add", flags.add_columns, "name:type");
  schema_evolve->add_option("--drop", flags.drop_columns, "name");
  schema_evolve->add_option("--rename", flags.rename_columns, "old:new");

  auto* partition = app.add_subcommand("partition", "Partition evolution");
  partition->require_subcommand(1);
  auto* partition_evolve = partition->add_subcommand("evolve", "Replace the partition spec");
  partition_evolve->add_option("--table", flags.table)->required();
  partition_evolve->add_option("--spec", flags.spec)->required();

  auto* snapshots = app.add_subcommand("snapshots", "List a table's snapshots");
  snapshots->add_option("--table", flags.table)->required();

  auto* branch = app.add_subcommand("branch", "Branches");
  branch->require_subcommand(1);
  auto* branch_create = branch->add_subcommand("create", "Create a branch");
  branch_create->add_option("name", flags.name)->required();
  branch_create->add_option("--from", flags.from, "Ref or commit (default: --branch)");
  auto* branch_list = branch->add_subcommand("list", "List branches");

  auto* tag = app.add_subcommand("tag", "Tags");
  tag->require_subcommand(1);
  auto* tag_create = tag->add_subcommand("create", "Create an immutable tag");
  tag_create->add_option("name", flags.name)->required();
  tag_create->add_option("--at", flags.from, "Ref or commit (default: --branch)");
  auto* tag_list = tag->add_subcommand("list", "List tags");

  auto* merge = app.add_subcommand("merge", "Merge one branch into another");
  merge->add_option("source", flags.source)->required();
  merge->add_option("--into", flags.into)->required();

  auto* log = app.add_subcommand("log", "Commit history, newest first");
  log->add_option("--table", flags.table);

  auto* rollback = app.add_subcommand("rollback", "Point a table at an earlier snapshot");
  rollback->add_option("--table", flags.table)->required();
  rollback->add_option("--to-snapshot", flags.to_snapshot)->required();

  auto* compact = app.add_subcommand("compact", "Merge small files");
  compact->add_option("--table", flags.table)->required();
  compact->add_option("--target-file-size", flags.target_file_size)->check(CLI::PositiveNumber);

  auto* expire = app.add_subcommand("expire-snapshots", "Drop old snapshots");
  expire->add_option("--table", flags.table)->required();
  expire->add_option("--older-than", flags.older_than, "Epoch ms or ISO-8601 UTC")->required();
  expire->add_option("--keep-last", flags.keep_last)->check(CLI::PositiveNumber);

  auto* gc = app.add_subcommand("gc", "Delete unreferenced objects");
  gc->add_option("--table", flags.table)->required();
  gc->add_option("--grace", flags.grace_ms, "Milliseconds")->check(CLI::NonNegativeNumber);

  auto* scd2 = app.add_subcommand("scd2-merge", "Type 2 slowly changing dimension merge");
  scd2->add_option("--table", flags.table)->required();
  scd2->add_option("--source", flags.source, "CSV file")->required();
  scd2->add_option("--key", flags.keys)->required();
  scd2->add_option("--tracked", flags.tracked)->required();
  scd2->add_option("--ts", flags.txn_ts, "ISO-8601 UTC (default: now)");
  scd2->add_option("--effective-from", flags.effective_from);
  scd2->add_option("--effective-to", flags.effective_to);
  scd2->add_option("--is-current", flags.is_current);

  auto* check_ri = app.add_subcommand("check-ri", "List foreign keys with no dimension row");
  check_ri->add_option("--fact", flags.fact)->required();
  check_ri->add_option("--fk", flags.fk)->required();
  check_ri->add_option("--dim", flags.dim)->required();
  check_ri->add_option("--key", flags.dim_key)->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (flags.root.empty()) {
      throw CLI::RequiredError("--root (or MINILAKE_ROOT)");
    }
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: UsageError: " << e.what() << "\n" << app.help();
    return 2;
  }

  Runner runner(flags, out);
  try {
    if (init->parsed()) runner.Init();
    else if (table_create->parsed()) runner.TableCreate();
    else if (tables->parsed()) runner.Tables();
    else if (ingest->parsed()) runner.Ingest();
    else if (scan->parsed()) runner.Scan();
    else if (del->parsed()) runner.Delete();
    else if (schema_evolve->parsed()) runner.SchemaEvolve();
    else if (partition_evolve->parsed()) runner.PartitionEvolve();
    else if (snapshots->parsed()) runner.Snapshots();
    else if (branch_create->parsed()) runner.BranchCreate();
    else if (branch_list->parsed()) runner.BranchList();
    else if (tag_create->parsed()) runner.TagCreate();
    else if (tag_list->parsed()) runner.TagList();
    else if (merge->parsed()) runner.Merge();
    else if (log->parsed()) runner.Log();
    else if (rollback->parsed()) runner.Rollback();
    else if (compact->parsed()) runner.Compact();
    else if (expire->parsed()) runner.ExpireSnapshots();
    else if (gc->parsed()) runner.Gc();
    else if (scd2->parsed()) runner.Scd2();
    else if (check_ri->parsed()) runner.CheckRi();
  } catch (const Error& e) {
    err << "error: " << ErrorCodeName(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << ErrorCodeName(ErrorCode::kIoError) << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace minilake
