public class Names {
    public String initials(String name) {
        String[] parts = name.split(" ");
        StringBuilder out = new StringBuilder();
        for (String p : parts) {
            out.append(p.charAt(0));
        }
        return out.toString();
    }
}
