#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "chp/analysis.hpp"
#include "chp/dispatch.hpp"
#include "chp/model.hpp"
#include "chp/pricing.hpp"
#include "chp/strategic.hpp"

namespace py = pybind11;
using namespace chp;

PYBIND11_MODULE(_core, m) {
    m.doc() = "Convex hull pricing and market power analysis for equal-capacity pools";
    m.attr("TOLERANCE") = kTol;

    py::register_exception<InfeasibleError>(m, "InfeasibleError");
    py::register_exception<DomainError>(m, "DomainError");
    py::register_exception<SchemaError>(m, "SchemaError");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<InstanceTooLargeError>(m, "InstanceTooLargeError");

    py::class_<GeneratorCost>(m, "GeneratorCost")
        .def(py::init<Money, Money>(), py::arg("startup_cost"), py::arg("variable_cost"))
        .def_readonly("startup_cost", &GeneratorCost::startup_cost)
        .def_readonly("variable_cost", &GeneratorCost::variable_cost)
        .def("evaluate", &GeneratorCost::evaluate, py::arg("output"))
        .def("full_cost", &GeneratorCost::full_cost, py::arg("capacity"))
        .def("__repr__", [](const GeneratorCost& c) {
            std::ostringstream out;
            out << "GeneratorCost(startup_cost=" << c.startup_cost
                << ", variable_cost=" << c.variable_cost << ")";
            return out.str();
        });

    py::class_<Market>(m, "Market")
        .def(py::init<Mw, std::vector<GeneratorCost>, std::vector<std::string>>(),
             py::arg("capacity"), py::arg("generators"),
             py::arg("names") = std::vector<std::string>{})
        .def_readonly("capacity", &Market::capacity)
        .def_readonly("generators", &Market::generators)
        .def_readonly("names", &Market::names)
        .def("size", &Market::size)
        .def("total_capacity", &Market::total_capacity);

    py::class_<BidProfile>(m, "BidProfile")
        .def_static("truthful", &BidProfile::truthful, py::arg("market"))
        .def_static("single_deviation", &BidProfile::single_deviation, py::arg("market"),
                    py::arg("deviator"), py::arg("reported_v"))
        .def_readwrite("reported_variable_costs", &BidProfile::reported_variable_costs)
        .def("reported_cost", &BidProfile::reported_cost, py::arg("market"), py::arg("index"));

    py::class_<MarginalSplit>(m, "MarginalSplit")
        .def_readonly("marginal_index", &MarginalSplit::marginal_index)
        .def_readonly("partial_output", &MarginalSplit::partial_output);

    py::class_<DispatchResult>(m, "DispatchResult")
        .def_readonly("outputs", &DispatchResult::outputs)
        .def_readonly("total_cost", &DispatchResult::total_cost)
        .def_readonly("split", &DispatchResult::split)
        .def_readonly("excluded", &DispatchResult::excluded)
        .def_readonly("x_holder", &DispatchResult::x_holder);

    py::class_<ChpPrice>(m, "ChpPrice")
        .def_readonly("price", &ChpPrice::price)
        .def_readonly("degenerate_demand", &ChpPrice::degenerate_demand);

    py::class_<PriceResult>(m, "PriceResult")
        .def_readonly("price", &PriceResult::price)
        .def_readonly("desired_outputs", &PriceResult::desired_outputs)
        .def_readonly("max_profits", &PriceResult::max_profits)
        .def_readonly("uplifts", &PriceResult::uplifts)
        .def_readonly("total_uplift", &PriceResult::total_uplift)
        .def_readonly("dispatch", &PriceResult::dispatch);

    py::class_<MinimalityVerdict>(m, "MinimalityVerdict")
        .def_readonly("holds", &MinimalityVerdict::holds)
        .def_readonly("worst_gap", &MinimalityVerdict::worst_gap);

    py::class_<StrategicOutcome>(m, "StrategicOutcome")
        .def_readonly("deviator", &StrategicOutcome::deviator)
        .def_readonly("reported_v", &StrategicOutcome::reported_v)
        .def_readonly("price", &StrategicOutcome::price)
        .def_readonly("dispatch", &StrategicOutcome::dispatch)
        .def_readonly("profit", &StrategicOutcome::profit)
        .def_readonly("bid_profit", &StrategicOutcome::bid_profit)
        .def_readonly("cost_guise", &StrategicOutcome::cost_guise);

    py::class_<BestResponse>(m, "BestResponse")
        .def_readonly("sup_gain", &BestResponse::sup_gain)
        .def_readonly("arg_v", &BestResponse::arg_v)
        .def_readonly("attained", &BestResponse::attained);

    py::class_<OracleEntry>(m, "OracleEntry")
        .def_readonly("sup_gain", &OracleEntry::sup_gain)
        .def_readonly("arg_v", &OracleEntry::arg_v)
        .def_readonly("attained", &OracleEntry::attained)
        .def_readonly("additional_gain", &OracleEntry::additional_gain);

    py::class_<PowerReport>(m, "PowerReport")
        .def_readonly("demand", &PowerReport::demand)
        .def_readonly("benchmark_profits", &PowerReport::benchmark_profits)
        .def_readonly("closed_form_power", &PowerReport::closed_form_power)
        .def_readonly("oracle", &PowerReport::oracle)
        .def_readonly("equality_flags", &PowerReport::equality_flags);

    py::class_<CoalitionReport>(m, "CoalitionReport")
        .def_readonly("members", &CoalitionReport::members)
        .def_readonly("power", &CoalitionReport::power)
        .def_readonly("feasible", &CoalitionReport::feasible);

    py::class_<SupermodularityViolation>(m, "SupermodularityViolation")
        .def_readonly("i", &SupermodularityViolation::i)
        .def_readonly("j", &SupermodularityViolation::j)
        .def_readonly("gap", &SupermodularityViolation::gap);

    py::enum_<DispatchTarget>(m, "DispatchTarget")
        .value("ZERO", DispatchTarget::Zero)
        .value("PARTIAL", DispatchTarget::Partial)
        .value("FULL", DispatchTarget::Full);

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("market", &Scenario::market)
        .def_readonly("load_min", &Scenario::load_min)
        .def_readonly("load_max", &Scenario::load_max)
        .def_readonly("load_step", &Scenario::load_step)
        .def_readonly("max_coalition", &Scenario::max_coalition)
        .def_readonly("label", &Scenario::label);

    py::class_<SweepRow>(m, "SweepRow")
        .def_readonly("load", &SweepRow::load)
        .def_readonly("coalition_size", &SweepRow::coalition_size)
        .def_readonly("n_coalitions", &SweepRow::n_coalitions)
        .def_readonly("n_with_power", &SweepRow::n_with_power)
        .def_readonly("pct_with_power", &SweepRow::pct_with_power)
        .def_readonly("mean_power", &SweepRow::mean_power)
        .def_readonly("mean_power_powerholders", &SweepRow::mean_power_powerholders)
        .def_readonly("max_power", &SweepRow::max_power);

    py::class_<SizeAggregate>(m, "SizeAggregate")
        .def_readonly("coalition_size", &SizeAggregate::coalition_size)
        .def_readonly("n_coalitions", &SizeAggregate::n_coalitions)
        .def_readonly("n_with_power", &SizeAggregate::n_with_power)
        .def_readonly("pct_with_power", &SizeAggregate::pct_with_power)
        .def_readonly("mean_power", &SizeAggregate::mean_power)
        .def_readonly("mean_power_powerholders", &SizeAggregate::mean_power_powerholders)
        .def_readonly("max_power", &SizeAggregate::max_power);

    py::class_<SweepResult>(m, "SweepResult")
        .def_readonly("rows", &SweepResult::rows)
        .def_readonly("per_size", &SweepResult::per_size);

    py::class_<LinearFit>(m, "LinearFit")
        .def_readonly("slope", &LinearFit::slope)
        .def_readonly("intercept", &LinearFit::intercept)
        .def_readonly("r_squared", &LinearFit::r_squared);

    m.def("evaluate_cost", &evaluate_cost, py::arg("cost"), py::arg("output"));
    m.def("merit_order", &merit_order, py::arg("market"),
          py::arg("bids") = std::optional<BidProfile>{});
    m.def("marginal_split", &marginal_split, py::arg("demand"), py::arg("capacity"),
          py::arg("available"));
    m.def("economic_dispatch", &economic_dispatch, py::arg("market"), py::arg("demand"),
          py::arg("excluded") = std::vector<int>{},
          py::arg("bids") = std::optional<BidProfile>{});
    m.def("dispatch_oracle", &dispatch_oracle, py::arg("market"), py::arg("demand"),
          py::arg("excluded") = std::vector<int>{},
          py::arg("bids") = std::optional<BidProfile>{});
    m.def("desired_output", &desired_output, py::arg("cost"), py::arg("price"),
          py::arg("capacity"));
    m.def("max_profit", &max_profit, py::arg("cost"), py::arg("price"), py::arg("capacity"));
    m.def("convex_hull_price", &convex_hull_price, py::arg("market"), py::arg("demand"),
          py::arg("bids") = std::optional<BidProfile>{});
    m.def("uplift", &uplift, py::arg("market"), py::arg("demand"), py::arg("price"),
          py::arg("bids") = std::optional<BidProfile>{});
    m.def("verify_uplift_minimality", &verify_uplift_minimality, py::arg("market"),
          py::arg("demand"), py::arg("grid_points"));
    m.def("truthful_profit", &truthful_profit, py::arg("market"), py::arg("demand"),
          py::arg("generator"));
    m.def("strategic_profit", &strategic_profit, py::arg("market"), py::arg("demand"),
          py::arg("generator"), py::arg("reported_v"));
    m.def("best_response_oracle", &best_response_oracle, py::arg("market"), py::arg("demand"),
          py::arg("generator"), py::arg("grid_step"));
    m.def("case_supremum", &case_supremum, py::arg("market"), py::arg("demand"),
          py::arg("generator"), py::arg("target"));
    m.def("market_power_index", &market_power_index, py::arg("market"), py::arg("demand"),
          py::arg("generator"));
    m.def("coalition_power", &coalition_power, py::arg("market"), py::arg("demand"),
          py::arg("members"));
    m.def("check_supermodularity", &check_supermodularity, py::arg("market"),
          py::arg("demand"));
    m.def("pair_best_response_oracle", &pair_best_response_oracle, py::arg("market"),
          py::arg("demand"), py::arg("i"), py::arg("j"), py::arg("grid_step"));
    m.def("analyze_market_power", &analyze_market_power, py::arg("market"), py::arg("demand"),
          py::arg("with_oracle") = false, py::arg("grid_step") = 1e-3);
    m.def("load_scenario", &load_scenario_file, py::arg("path"));
    m.def(
        "load_scenario_text",
        [](const std::string& text) {
            std::istringstream in(text);
            return load_scenario(in);
        },
        py::arg("text"));
    m.def("coalition_stats", &coalition_stats, py::arg("market"), py::arg("demand"),
          py::arg("size"));
    m.def("sweep", &sweep, py::arg("scenario"), py::arg("workers") = 1,
          py::call_guard<py::gil_scoped_release>());
    m.def("to_csv", &to_csv, py::arg("rows"));
    m.def("fit_mean_power", &fit_mean_power, py::arg("per_size"));
}
