// JSON payload shapes of the session service.

export interface DrawPrimitive {
  item_id: number;
  fill: string;
  vertices: [number, number][];
  z_order: number;
}

export interface RenderedScene {
  view: string;
  reference: boolean;
  primitives: DrawPrimitive[];
}

export interface QueryResponse {
  done: boolean;
  query_index: number;
  left?: RenderedScene;
  right?: RenderedScene;
  reference?: RenderedScene | null;
}

export interface EstimateResponse {
  w: number[] | null;
  rendered: RenderedScene | null;
  trajectory: number[][];
  query_index: number;
  n_queries: number;
  done: boolean;
}

export interface CatalogEntry {
  index: number;
  w: number[];
  rendered: RenderedScene;
}

export type Choice = "left" | "right" | "skip";

export interface SessionParams {
  task: string;
  method?: string;
  N?: number;
  seed?: number;
  mode?: string;
}

export interface LikertAnswers {
  q1: number;
  q2: number;
  q3: number;
  q4: number;
}
