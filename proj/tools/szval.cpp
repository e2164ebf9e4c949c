// szval command-line tool: dataset conversion, fold planning, scoring and
// reporting for EEG seizure-detection validation.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "szval/pipeline.hpp"

namespace {

void add_scoring_flags(CLI::App* cmd, szval::ScoringParams& params) {
    cmd->add_option("--pre-tol", params.pre_ictal_tolerance,
                    "Pre-ictal tolerance in seconds")
        ->capture_default_str();
    cmd->add_option("--post-tol", params.post_ictal_tolerance,
                    "Post-ictal tolerance in seconds")
        ->capture_default_str();
    cmd->add_option("--merge-gap", params.merge_gap,
                    "Merge events separated by less than this many seconds")
        ->capture_default_str();
    cmd->add_option("--max-event-dur", params.max_event_duration,
                    "Split events longer than this many seconds")
        ->capture_default_str();
    cmd->add_option("--min-overlap", params.min_overlap,
                    "Minimum overlap in seconds for a detection (0 = any overlap)")
        ->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"EEG seizure-detection validation toolkit"};
    app.require_subcommand(1);

    // convert
    auto* convert = app.add_subcommand(
        "convert", "Convert a source dataset to the canonical BIDS layout");
    std::string source_format = "generic";
    szval::ConvertOptions copts;
    std::string convert_source, convert_dest;
    convert->add_option("--format", source_format,
                        "Source format: chbmit|tuh|siena|seizeit|generic")
        ->capture_default_str();
    convert->add_option("--source", convert_source, "Source dataset root")->required();
    convert->add_option("--dest", convert_dest, "Destination BIDS root")->required();
    convert->add_option("--task", copts.task, "BIDS task label")->capture_default_str();
    convert->add_flag("--zero-fill-missing", copts.zero_fill_missing,
                      "Zero-fill missing 10-20 electrodes");
    convert->add_flag("--allow-low-rate", copts.allow_low_rate,
                      "Allow inputs sampled below 256 Hz");
    convert->add_option("--jobs", copts.jobs, "Worker count")->capture_default_str();

    // detect-baseline
    auto* detect = app.add_subcommand(
        "detect-baseline", "Run the line-length baseline detector over a BIDS tree");
    szval::DetectOptions dopts;
    std::string detect_root;
    detect->add_option("--dataset", detect_root, "BIDS dataset root")->required();
    detect->add_option("--derivative", dopts.derivative, "Output derivative name")
        ->capture_default_str();
    detect->add_option("--threshold", dopts.params.threshold,
                       "Line-length threshold in microvolts")
        ->capture_default_str();
    detect->add_option("--window", dopts.params.window_seconds,
                       "Feature window length in seconds")
        ->capture_default_str();
    detect->add_option("--jobs", dopts.jobs, "Worker count")->capture_default_str();

    // score
    auto* score = app.add_subcommand(
        "score", "Score a hypothesis derivative tree against reference annotations");
    szval::ScoreOptions sopts;
    std::string score_root, score_out, score_scenario = "subjectIndependent-single";
    std::string score_training;
    score->add_option("--dataset", score_root, "BIDS dataset root")->required();
    score->add_option("--derivative", sopts.derivative, "Hypothesis derivative name")
        ->capture_default_str();
    score->add_option("--name", sopts.dataset_name, "Dataset name for the report")
        ->capture_default_str();
    score->add_option("--scenario", score_scenario,
                      "personalized|subjectIndependent-single|subjectIndependent-cross")
        ->capture_default_str();
    score->add_option("--training-dataset", score_training,
                      "Training dataset name (cross-dataset scenario)");
    score->add_option("--type-filter", sopts.type_filter,
                      "Score only events under this seizure type code")
        ->capture_default_str();
    score->add_option("-o,--output", score_out, "Output JSON path (default: stdout)");
    add_scoring_flags(score, sopts.params);

    // plan
    auto* plan = app.add_subcommand("plan", "Generate a cross-validation fold plan");
    szval::PlanOptions popts;
    std::string plan_root, plan_out, plan_mode = "variable";
    plan->add_option("--dataset", plan_root, "BIDS dataset root")->required();
    plan->add_option("--method", popts.method, "tscv|loo|kfold|fixed")
        ->capture_default_str();
    plan->add_option("--mode", plan_mode, "TSCV mode: variable|fixed")
        ->capture_default_str();
    plan->add_option("--initial-train-hours", popts.tscv.initial_train_hours,
                     "Initial TSCV training window in hours")
        ->capture_default_str();
    plan->add_option("--step-hours", popts.tscv.step_hours, "TSCV step in hours")
        ->capture_default_str();
    plan->add_option("--k", popts.k, "Number of folds for k-fold")->capture_default_str();
    plan->add_option("--seed", popts.seed, "Shuffle seed")->capture_default_str();
    plan->add_option("--train-subject", popts.train_subjects,
                     "Fixed-split training subject (repeatable)");
    plan->add_option("--test-subject", popts.test_subjects,
                     "Fixed-split test subject (repeatable)");
    plan->add_option("-o,--output", plan_out, "Fold-plan manifest path (default: stdout)");

    // report
    auto* report = app.add_subcommand(
        "report", "Assemble a model card from scoring result documents");
    std::vector<std::string> result_files;
    std::string card_out, card_md_out, checklist_out;
    std::vector<std::string> checklist_done;
    szval::ModelCard card;
    report->add_option("--results", result_files, "DatasetResult JSON files")
        ->required();
    report->add_option("--model-name", card.model_name, "Model name")->required();
    report->add_option("--developers", card.developers, "Developer names");
    report->add_option("--institution", card.institution, "Institution");
    report->add_option("--email", card.contact_email, "Contact email");
    report->add_option("--source-link", card.source_link, "Link to source code");
    report->add_option("--citation", card.citation, "Citation details");
    report->add_option("--description", card.description, "Model description");
    report->add_option("-o,--output", card_out, "Structured card JSON path");
    report->add_option("--markdown", card_md_out, "Human-readable card path");
    report->add_option("--checklist", checklist_out, "Reproducibility checklist path");
    report->add_option("--checklist-item", checklist_done,
                       "Completed checklist item, key or key=note (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*convert) {
            copts.format = szval::parse_source_format(source_format);
            copts.source_root = convert_source;
            copts.dest_root = convert_dest;
            szval::ConversionReport rep = szval::convert_dataset(copts);
            std::printf("converted %zu file(s), %zu error(s)\n", rep.files.size(),
                        rep.errors.size());
            for (const std::string& e : rep.errors)
                std::fprintf(stderr, "error: %s\n", e.c_str());
            return rep.errors.empty() ? 0 : 1;
        }
        if (*detect) {
            dopts.dataset_root = detect_root;
            szval::DetectReport rep = szval::detect_baseline_dataset(dopts);
            std::printf("detected over %d run(s), %zu error(s)\n", rep.runs_processed,
                        rep.errors.size());
            for (const std::string& e : rep.errors)
                std::fprintf(stderr, "error: %s\n", e.c_str());
            return rep.errors.empty() ? 0 : 1;
        }
        if (*score) {
            sopts.dataset_root = score_root;
            sopts.scenario = szval::parse_scenario(score_scenario);
            if (!score_training.empty()) sopts.training_dataset = score_training;
            szval::json doc = szval::score_dataset_document(sopts);
            std::string text = doc.dump(2) + "\n";
            if (score_out.empty())
                std::fputs(text.c_str(), stdout);
            else
                szval::detail::write_text_file(score_out, text);
            return 0;
        }
        if (*plan) {
            popts.dataset_root = plan_root;
            popts.tscv.mode = plan_mode == "fixed" ? szval::TscvMode::fixed
                                                   : szval::TscvMode::variable;
            szval::PlanOutcome outcome = szval::plan_dataset(popts);
            for (const std::string& w : outcome.plan.warnings)
                std::fprintf(stderr, "warning: %s\n", w.c_str());
            for (const std::string& e : outcome.exclusions)
                std::fprintf(stderr, "excluded: %s\n", e.c_str());
            if (!outcome.violations.empty()) {
                for (const auto& v : outcome.violations)
                    std::fprintf(stderr, "violation (fold %d): %s\n", v.fold_index,
                                 v.description.c_str());
                std::fprintf(stderr, "plan verification failed; nothing written\n");
                return 1;
            }
            std::string manifest = szval::serialize_fold_plan(outcome.plan);
            if (plan_out.empty())
                std::fputs(manifest.c_str(), stdout);
            else
                szval::detail::write_text_file(plan_out, manifest);
            return 0;
        }
        if (*report) {
            for (const std::string& path : result_files)
                card.results.push_back(szval::dataset_result_from_json(
                    szval::json::parse(szval::detail::read_text_file(path))));
            if (!card.results.empty()) {
                szval::json first =
                    szval::json::parse(szval::detail::read_text_file(result_files[0]));
                if (first.contains("scoringParams"))
                    card.scoring_params = first["scoringParams"];
            }
            std::string structured =
                szval::emit_model_card(card, szval::CardFormat::structured);
            if (card_out.empty())
                std::fputs(structured.c_str(), stdout);
            else
                szval::detail::write_text_file(card_out, structured);
            if (!card_md_out.empty())
                szval::detail::write_text_file(
                    card_md_out,
                    szval::emit_model_card(card, szval::CardFormat::human_readable));
            if (!checklist_out.empty()) {
                std::map<std::string, std::string> answers;
                for (const std::string& item : checklist_done) {
                    std::size_t eq = item.find('=');
                    if (eq == std::string::npos)
                        answers[item] = "";
                    else
                        answers[item.substr(0, eq)] = item.substr(eq + 1);
                }
                szval::detail::write_text_file(checklist_out,
                                               szval::emit_checklist(answers));
            }
            return 0;
        }
    } catch (const std::exception& ex) {
        std::fprintf(stderr, "error: %s\n", ex.what());
        return 1;
    }
    return 0;
}
