"""One fixed stylesheet so figures are comparable across runs."""

FIGSIZE = (6.0, 4.0)
DPI = 120
GRID = dict(alpha=0.3, linewidth=0.6)
EMBB_COLOR = "#1f77b4"
URLLC_COLOR = "#d62728"
BAR_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b")


def apply(ax, title=None, xlabel=None, ylabel=None):
    ax.grid(True, **GRID)
    if title:
        ax.set_title(title)
    if xlabel:
        ax.set_xlabel(xlabel)
    if ylabel:
        ax.set_ylabel(ylabel)
