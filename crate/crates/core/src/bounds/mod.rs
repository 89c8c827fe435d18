//! Computable bound evaluators: the converse lower bound, the achievability
//! budget of the full simulation, second-order and direct-product
//! thresholds, and hypothesis-testing tools.

pub mod asymptotic;
pub mod lower;
pub mod testing;
pub mod upper;

pub use asymptotic::{chernoff_exponent, direct_product_thresholds, second_order_predict, DirectProductReport};
pub use lower::{lambda_prime, lower_bound, Interval, LowerBoundReport, TailSpec};
pub use testing::{beta_eps, beta_eps_upper, sk_bounds, sk_chain};
pub use upper::{budget_error_bound, protocol5_budget, round_budgets, upper_bound_budget, RoundBudget, UpperBoundBudget};
