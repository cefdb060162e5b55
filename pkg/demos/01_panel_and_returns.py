"""
From raw weekly sales to log-returns.

A small hand-written panel is parsed, a zero week is floored, and the
returns ln(S[t+1] / S[t]) are printed. Multiplying every sales figure by the
same constant leaves the returns untouched.
"""

from corrtax.panel import apply_floor, log_returns, panel_to_csv, parse_panel, validate_panel
from corrtax.errors import PanelError

TEXT = """date,alpha,beta,gamma
2003-05-01,1200,800,300
2003-05-08,1500,700,0
2003-05-15,1350,760,450
2003-05-22,1600,650,500
2003-05-29,1700,600,420
"""

panel = parse_panel(TEXT)
print(f"{panel.n_rows} weeks x {panel.n_assets} assets: {', '.join(panel.assets)}")

try:
    validate_panel(panel)
except PanelError as exc:
    # gamma sold nothing in the second week
    print("rejected:", exc)

panel = validate_panel(apply_floor(panel, 1.0))
returns = log_returns(panel)
print(panel_to_csv(returns))

scaled = log_returns(panel.scaled(1000.0))
print("max change after scaling sales by 1000:", abs(scaled.values - returns.values).max())
