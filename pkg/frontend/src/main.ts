import { ApiClient } from "./api.js";
import { htmlEl } from "./render.js";
import {
  RunMeta,
  Store,
  ViewState,
  decodeState,
  encodeState,
} from "./state.js";
import { CharacteristicsView } from "./views/characteristics.js";
import { MapView } from "./views/map.js";
import { Pm25View } from "./views/pm25.js";
import { SimilarityView } from "./views/similarity.js";
import { SourcesView } from "./views/sources.js";
import { TransitionsView } from "./views/transitions.js";

interface PanelView {
  el: HTMLElement;
  render(state: ViewState): void;
}

export interface Console {
  store: Store;
  root: HTMLElement;
  /** Resolves once any refetch triggered by the last update settled. */
  idle(): Promise<void>;
}

/**
 * Boots the six coordinated views against a finished run. All views
 * share one store; any update re-renders every view synchronously
 * (one render cycle). Window zooms and source changes refetch the
 * PM2.5 view, timestamp changes refetch the map slice; the remaining
 * payloads never change for a done run.
 */
export async function createConsole(
  root: HTMLElement,
  api: ApiClient,
  initial: Partial<ViewState> = {},
): Promise<Console> {
  const [sources, similarity, characteristics, transitions] = await Promise.all([
    api.sources(),
    api.similarity(),
    api.characteristics(),
    api.transitionsSources(),
  ]);
  const span: [string, string] = [
    transitions.data.timestamps[0],
    transitions.data.timestamps[transitions.data.timestamps.length - 1],
  ];
  const meta: RunMeta = {
    runId: api.runId,
    stations: similarity.data.stations,
    sources: transitions.data.sources,
    span,
  };
  const fromUrl =
    typeof location !== "undefined" ? decodeState(location.hash, meta) : {};
  const store = new Store(meta, { ...fromUrl, ...initial });

  const firstMapTs = store.state.selectedTimestamp ?? span[0];
  const [mapPayload, pm25Payload] = await Promise.all([
    api.map(firstMapTs),
    api.transitionsPm25({
      source: store.state.selectedSource,
      from: store.state.timeRange?.[0],
      to: store.state.timeRange?.[1],
    }),
  ]);

  const views: Record<string, PanelView> = {
    sources: new SourcesView(sources, store),
    similarity: new SimilarityView(similarity, store),
    characteristics: new CharacteristicsView(characteristics, store),
    map: new MapView(mapPayload, store),
    transitions: new TransitionsView(transitions, store),
    pm25: new Pm25View(pm25Payload, store),
  };

  root.classList.add("af-console");
  const panels = new Map<string, HTMLElement>();
  const renderLayout = (state: ViewState) => {
    root.replaceChildren();
    for (const name of state.layout) {
      let panel = panels.get(name);
      if (!panel) {
        panel = htmlEl("div", "af-panel");
        panel.dataset.panel = name;
        panel.draggable = true;
        panel.addEventListener("dragstart", (ev) => {
          ev.dataTransfer?.setData("text/af-panel", name);
        });
        panel.addEventListener("dragover", (ev) => ev.preventDefault());
        panel.addEventListener("drop", (ev) => {
          const other = ev.dataTransfer?.getData("text/af-panel");
          if (other && other !== name) store.swapPanels(other, name);
        });
        panel.appendChild(views[name].el);
        panels.set(name, panel);
      }
      root.appendChild(panel);
    }
  };

  let pending: Promise<void> = Promise.resolve();
  let lastState = store.state;

  const sameRange = (
    a: [string, string] | null,
    b: [string, string] | null,
  ) => (a === null && b === null) || (a?.[0] === b?.[0] && a?.[1] === b?.[1]);

  const refetch = (state: ViewState, previous: ViewState) => {
    const tasks: Promise<void>[] = [];
    if (
      !sameRange(state.timeRange, previous.timeRange) ||
      state.selectedSource !== previous.selectedSource
    ) {
      tasks.push(
        api
          .transitionsPm25({
            source: state.selectedSource,
            from: state.timeRange?.[0],
            to: state.timeRange?.[1],
          })
          .then((payload) => {
            (views.pm25 as Pm25View).setData(payload);
            views.pm25.render(store.state);
          }),
      );
    }
    if (
      state.selectedTimestamp !== previous.selectedTimestamp &&
      state.selectedTimestamp
    ) {
      tasks.push(
        api.map(state.selectedTimestamp).then((payload) => {
          (views.map as MapView).setData(payload);
          views.map.render(store.state);
        }),
      );
    }
    if (tasks.length) pending = Promise.all(tasks).then(() => undefined);
  };

  store.subscribe((state) => {
    renderLayout(state);
    for (const name of state.layout) views[name].render(state);
    if (typeof location !== "undefined") {
      history.replaceState(null, "", `#${encodeState(state)}`);
    }
    const previous = lastState;
    lastState = state;
    refetch(state, previous);
  });

  renderLayout(store.state);
  for (const name of store.state.layout) views[name].render(store.state);

  return {
    store,
    root,
    idle: () => pending,
  };
}
