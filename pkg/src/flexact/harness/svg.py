"""Minimal standalone SVG line and scatter charts."""

from xml.sax.saxutils import escape

PALETTE = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]


def _ticks(lo, hi, n=5):
    if hi == lo:
        return [lo]
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


class Chart:
    def __init__(self, title, xlabel, ylabel, width=640, height=420, xlim=None, ylim=None):
        self.title = title
        self.xlabel = xlabel
        self.ylabel = ylabel
        self.width = width
        self.height = height
        self.xlim = xlim
        self.ylim = ylim
        self.lines = []
        self.scatters = []
        self.margin = (60, 150, 40, 50)  # left, right, top, bottom

    def line(self, xs, ys, label, color=None):
        self.lines.append((list(xs), list(ys), label, color))

    def scatter(self, xs, ys, label, color=None, radius=2.0):
        self.scatters.append((list(xs), list(ys), label, color, radius))

    def _limits(self):
        xs = [x for s in self.lines + self.scatters for x in s[0]]
        ys = [y for s in self.lines + self.scatters for y in s[1]]
        xlim = self.xlim or (min(xs), max(xs))
        ylim = self.ylim or (min(ys), max(ys))
        if xlim[0] == xlim[1]:
            xlim = (xlim[0] - 0.5, xlim[1] + 0.5)
        if ylim[0] == ylim[1]:
            ylim = (ylim[0] - 0.5, ylim[1] + 0.5)
        return xlim, ylim

    def render(self) -> str:
        left, right, top, bottom = self.margin
        pw = self.width - left - right
        ph = self.height - top - bottom
        (x0, x1), (y0, y1) = self._limits()

        def px(x):
            return left + (x - x0) / (x1 - x0) * pw

        def py(y):
            return top + ph - (y - y0) / (y1 - y0) * ph

        out = [
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" height="{self.height}" '
            f'viewBox="0 0 {self.width} {self.height}" font-family="sans-serif" font-size="11">',
            f'<rect width="{self.width}" height="{self.height}" fill="white"/>',
            f'<text x="{left + pw / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(self.title)}</text>',
            f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
        ]
        for t in _ticks(x0, x1):
            out.append(f'<line x1="{px(t):.1f}" y1="{top + ph}" x2="{px(t):.1f}" y2="{top + ph + 4}" stroke="#333"/>')
            out.append(f'<text x="{px(t):.1f}" y="{top + ph + 16}" text-anchor="middle">{t:.3g}</text>')
        for t in _ticks(y0, y1):
            out.append(f'<line x1="{left - 4}" y1="{py(t):.1f}" x2="{left}" y2="{py(t):.1f}" stroke="#333"/>')
            out.append(f'<text x="{left - 6}" y="{py(t) + 4:.1f}" text-anchor="end">{t:.3g}</text>')
        out.append(f'<text x="{left + pw / 2:.1f}" y="{self.height - 10}" text-anchor="middle">{escape(self.xlabel)}</text>')
        out.append(f'<text x="15" y="{top + ph / 2:.1f}" text-anchor="middle" '
                   f'transform="rotate(-90 15 {top + ph / 2:.1f})">{escape(self.ylabel)}</text>')

        legend = []
        for i, (xs, ys, label, color) in enumerate(self.lines):
            color = color or PALETTE[i % len(PALETTE)]
            pts = " ".join(f"{px(x):.2f},{py(y):.2f}" for x, y in zip(xs, ys))
            out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"><title>{escape(label)}</title></polyline>')
            legend.append((label, color, "line"))
        for i, (xs, ys, label, color, r) in enumerate(self.scatters):
            color = color or PALETTE[(len(self.lines) + i) % len(PALETTE)]
            out.append(f'<g fill="{color}" fill-opacity="0.6"><title>{escape(label)}</title>')
            out.extend(f'<circle cx="{px(x):.2f}" cy="{py(y):.2f}" r="{r}"/>' for x, y in zip(xs, ys))
            out.append("</g>")
            legend.append((label, color, "dot"))

        lx = left + pw + 12
        for i, (label, color, kind) in enumerate(legend):
            ly = top + 12 + 18 * i
            if kind == "line":
                out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
            else:
                out.append(f'<circle cx="{lx + 10}" cy="{ly}" r="4" fill="{color}"/>')
            out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(label)}</text>')
        out.append("</svg>")
        return "\n".join(out) + "\n"

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.render())
