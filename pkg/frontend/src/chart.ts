// Bar/line charts as plain SVG. Series are read straight out of the grid --
// one series per column header, one point per row header -- so the chart can
// never disagree with the pivot table next to it.

import type { ResultDoc } from './types.js';

export interface ChartSeries {
  measure: string;
  labels: string[];
  series: { name: string; values: (number | null)[] }[];
}

export function chartSeries(doc: ResultDoc, measure?: string): ChartSeries {
  const m = measure ?? doc.measures[0];
  return {
    measure: m,
    labels: doc.row_headers.map((h) => (h.length ? h.join(' / ') : 'total')),
    series: doc.col_headers.map((header, c) => ({
      name: header.length ? header.join(' / ') : m,
      values: doc.values.map((row) => (row[c] === null ? null : row[c]![m])),
    })),
  };
}

const WIDTH = 640;
const HEIGHT = 280;
const PAD = 36;
const PALETTE = ['#4878d0', '#ee854a', '#6acc64', '#d65f5f', '#956cb4', '#8c613c'];

function svgEl<K extends keyof SVGElementTagNameMap>(tag: K): SVGElementTagNameMap[K] {
  return document.createElementNS('http://www.w3.org/2000/svg', tag);
}

export function renderChart(
  container: HTMLElement,
  doc: ResultDoc,
  kind: 'bar' | 'line',
  measure?: string,
): void {
  const data = chartSeries(doc, measure);
  container.textContent = '';
  const points = data.series.flatMap((s) => s.values).filter((v): v is number => v !== null);
  if (points.length === 0) {
    const empty = document.createElement('p');
    empty.className = 'placeholder';
    empty.textContent = 'Nothing to chart: the grid has no non-empty cells.';
    container.appendChild(empty);
    return;
  }
  const lo = Math.min(0, ...points);
  const hi = Math.max(0, ...points);
  const span = hi - lo || 1;
  const scaleY = (v: number) => HEIGHT - PAD - ((v - lo) / span) * (HEIGHT - 2 * PAD);

  const svg = svgEl('svg');
  svg.setAttribute('viewBox', `0 0 ${WIDTH} ${HEIGHT}`);
  svg.setAttribute('class', 'chart');

  const axis = svgEl('line');
  axis.setAttribute('x1', String(PAD));
  axis.setAttribute('x2', String(WIDTH - PAD));
  axis.setAttribute('y1', String(scaleY(0)));
  axis.setAttribute('y2', String(scaleY(0)));
  axis.setAttribute('stroke', '#999');
  svg.appendChild(axis);

  const groups = data.labels.length;
  const groupWidth = (WIDTH - 2 * PAD) / Math.max(groups, 1);

  data.series.forEach((series, s) => {
    const color = PALETTE[s % PALETTE.length];
    if (kind === 'bar') {
      const barWidth = (groupWidth * 0.8) / data.series.length;
      series.values.forEach((value, g) => {
        if (value === null) return;
        const rect = svgEl('rect');
        const x = PAD + g * groupWidth + groupWidth * 0.1 + s * barWidth;
        rect.setAttribute('x', String(x));
        rect.setAttribute('width', String(Math.max(barWidth - 2, 1)));
        rect.setAttribute('y', String(Math.min(scaleY(value), scaleY(0))));
        rect.setAttribute('height', String(Math.abs(scaleY(value) - scaleY(0)) || 1));
        rect.setAttribute('fill', color);
        const title = svgEl('title');
        title.textContent = `${data.labels[g]} ${series.name}: ${value}`;
        rect.appendChild(title);
        svg.appendChild(rect);
      });
    } else {
      const path = svgEl('polyline');
      const coords = series.values
        .map((value, g) =>
          value === null ? null : `${PAD + (g + 0.5) * groupWidth},${scaleY(value)}`,
        )
        .filter((p): p is string => p !== null);
      path.setAttribute('points', coords.join(' '));
      path.setAttribute('fill', 'none');
      path.setAttribute('stroke', color);
      path.setAttribute('stroke-width', '2');
      svg.appendChild(path);
    }
  });

  data.labels.forEach((label, g) => {
    const text = svgEl('text');
    text.setAttribute('x', String(PAD + (g + 0.5) * groupWidth));
    text.setAttribute('y', String(HEIGHT - 8));
    text.setAttribute('text-anchor', 'middle');
    text.setAttribute('class', 'chart-label');
    text.textContent = label;
    svg.appendChild(text);
    data.series.forEach((series, s) => {
      const value = series.values[g];
      if (value === null) return;
      const vt = svgEl('text');
      vt.setAttribute(
        'x',
        String(
          kind === 'bar'
            ? PAD +
                g * groupWidth +
                groupWidth * 0.1 +
                (s + 0.5) * ((groupWidth * 0.8) / data.series.length)
            : PAD + (g + 0.5) * groupWidth,
        ),
      );
      vt.setAttribute('y', String(Math.min(scaleY(value), scaleY(0)) - 4));
      vt.setAttribute('text-anchor', 'middle');
      vt.setAttribute('class', 'chart-value');
      vt.textContent = String(value);
      svg.appendChild(vt);
    });
  });

  container.appendChild(svg);
}
