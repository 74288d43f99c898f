public class Grid {
    private int[][] cells;

    public void mark(int row, int col, int v) {
        int count = 0;
        cells[row][col] = v;
    }
}
